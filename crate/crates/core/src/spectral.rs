//! Weighted Dirichlet forms on balls and their smallest eigenvalue.
//!
//! The form counts ordered pairs, so every edge contributes twice:
//! `Q(η) = Σ_x Σ_{y ~ x} (η(x) - η(y))² w(|(x,y)|)`.

use std::hash::{DefaultHasher, Hash, Hasher};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{rat, Chain, ChainError, GrowthFunction, Rational};
use crate::spaces::{BallIndex, Space, SpaceError};

/// Residual bound returned eigenpairs must meet.
pub const RESIDUAL_TOL: f64 = 1e-8;

const MAX_OUTER: usize = 20_000;
const CG_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("support of the test function reaches `{0}`, which is not an interior point")]
    SupportEscapes(String),
    #[error("the Dirichlet frontier of B_{0} is empty; the form has constants in its kernel")]
    EmptyFrontier(u32),
    #[error("vertex weight must be positive, got {0} at |x| = {1}")]
    BadVertexWeight(f64, u32),
    #[error("inverse iteration stopped after {iterations} steps with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
}

type Result<T> = std::result::Result<T, SpectralError>;

/// `ρ` in `Qη = λ·diag(ρ)η`.
#[derive(Clone, Debug)]
pub enum VertexWeight {
    Unit,
    /// `ρ(x) = 1/f(|x|)`
    Reciprocal(GrowthFunction),
}

impl VertexWeight {
    pub fn eval(&self, t: u32) -> f64 {
        match self {
            VertexWeight::Unit => 1.0,
            VertexWeight::Reciprocal(f) => 1.0 / f.eval_f64(t),
        }
    }

    pub fn eval_exact(&self, t: u32) -> Rational {
        match self {
            VertexWeight::Unit => rat(1),
            VertexWeight::Reciprocal(f) => rat(1) / f.eval(t),
        }
    }

    fn label(&self) -> String {
        match self {
            VertexWeight::Unit => "unit".into(),
            VertexWeight::Reciprocal(f) => format!("reciprocal:{f}"),
        }
    }
}

/// Exact `Q(η)` for a 0-chain `η` supported on the interior of `ball`.
pub fn quadratic_form(eta: &Chain, w: &GrowthFunction, ball: &BallIndex) -> Result<Rational> {
    if eta.dim() != 0 {
        return Err(ChainError::DimensionMismatch(0, eta.dim()).into());
    }
    let mut val = vec![Rational::zero(); ball.len()];
    for (s, c) in eta.iter() {
        let p = &s.vertices()[0];
        match ball.index_of(p) {
            Some(i) if ball.is_interior(i) => val[i] = c.clone(),
            _ => return Err(SpectralError::SupportEscapes(format!("{p:?}"))),
        }
    }
    let mut q = Rational::zero();
    for (a, b) in ball.edges() {
        let d = &val[a] - &val[b];
        if !d.is_zero() {
            q += &d * &d * w.eval(ball.length(a).max(ball.length(b)));
        }
    }
    Ok(q * rat(2))
}

/// `Σ η(x)² ρ(|x|)`
pub fn weighted_norm(eta: &Chain, rho: &VertexWeight, ball: &BallIndex) -> Result<Rational> {
    let mut n = Rational::zero();
    for (s, c) in eta.iter() {
        let p = &s.vertices()[0];
        let t = ball.length_of(p).ok_or_else(|| SpectralError::SupportEscapes(format!("{p:?}")))?;
        n += c * c * rho.eval_exact(t);
    }
    Ok(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapResult {
    #[serde(rename = "R")]
    pub r: u32,
    pub lambda_min: f64,
    pub poincare_constant: f64,
    pub iterations: usize,
    pub residual: f64,
    pub domain_size: usize,
}

/// Sparse `Q` restricted to `B_R`, with `B_R` sitting inside a ball of
/// radius `R + 1` so every neighbour of the domain is known.
pub struct DirichletOperator {
    n: usize,
    diag: Vec<f64>,
    off: Vec<Vec<(usize, f64)>>,
    rho: Vec<f64>,
}

impl DirichletOperator {
    pub fn new(ball: &BallIndex, r: u32, w: &GrowthFunction, rho: &VertexWeight) -> Result<Self> {
        let n = ball.points().iter().enumerate().filter(|(i, _)| ball.length(*i) <= r).count();
        let mut diag = vec![0.0; n];
        let mut off = vec![Vec::new(); n];
        let mut rhos = Vec::with_capacity(n);
        for i in 0..n {
            let t = ball.length(i);
            let p = rho.eval(t);
            if !(p > 0.0 && p.is_finite()) {
                return Err(SpectralError::BadVertexWeight(p, t));
            }
            rhos.push(p);
            for &j in ball.neighbors(i) {
                let we = 2.0 * w.eval_f64(t.max(ball.length(j)));
                diag[i] += we;
                if j < n {
                    off[i].push((j, -we));
                }
            }
        }
        Ok(DirichletOperator { n, diag, off, rho: rhos })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `Q u`
    pub fn apply_q(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut s = self.diag[i] * u[i];
            for &(j, c) in &self.off[i] {
                s += c * u[j];
            }
            out[i] = s;
        }
    }

    /// `D^{-1/2} Q D^{-1/2} v`
    fn apply_sym(&self, v: &[f64], out: &mut [f64], tmp: &mut [f64]) {
        for i in 0..self.n {
            tmp[i] = v[i] / self.rho[i].sqrt();
        }
        self.apply_q(tmp, out);
        for i in 0..self.n {
            out[i] /= self.rho[i].sqrt();
        }
    }

    /// Dense `Q` and `ρ`, for cross-checking against a dense solver.
    pub fn dense(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            m[i][i] = self.diag[i];
            for &(j, c) in &self.off[i] {
                m[i][j] = c;
            }
        }
        (m, self.rho.clone())
    }

    /// `‖Qu − λDu‖ / ‖u‖`
    pub fn generalized_residual(&self, u: &[f64], lambda: f64) -> f64 {
        let mut qu = vec![0.0; self.n];
        self.apply_q(u, &mut qu);
        let r: f64 = (0..self.n).map(|i| (qu[i] - lambda * self.rho[i] * u[i]).powi(2)).sum();
        r.sqrt() / norm(u)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients for `A x = b`, warm-started at `x`.
fn cg(op: &DirichletOperator, b: &[f64], x: &mut [f64]) {
    let n = op.n;
    let mut tmp = vec![0.0; n];
    let mut ax = vec![0.0; n];
    op.apply_sym(x, &mut ax, &mut tmp);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - ax[i]).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = CG_TOL * CG_TOL * dot(b, b).max(f64::MIN_POSITIVE);
    let mut ap = vec![0.0; n];
    for _ in 0..(10 * n + 100) {
        if rr <= target {
            break;
        }
        op.apply_sym(&p, &mut ap, &mut tmp);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
}

fn problem_seed(space: &str, r: u32, w: &GrowthFunction, rho: &VertexWeight, seed: u64) -> u64 {
    let mut h = DefaultHasher::new();
    (space, r, w.to_string(), rho.label(), seed).hash(&mut h);
    h.finish()
}

/// Smallest `λ` with `Qη = λ·diag(ρ)η` for `η` supported in `B_R`.
pub fn dirichlet_gap(space: &Space, r: u32, w: &GrowthFunction, rho: &VertexWeight, seed: u64) -> Result<GapResult> {
    w.validate(r + 1)?;
    if let VertexWeight::Reciprocal(f) = rho {
        f.validate(r)?;
    }
    let ball = space.ball(r + 1)?;
    if ball.points().iter().enumerate().all(|(i, _)| ball.length(i) <= r) {
        return Err(SpectralError::EmptyFrontier(r));
    }
    let op = DirichletOperator::new(&ball, r, w, rho)?;
    let n = op.len();
    let mut rng = ChaCha8Rng::seed_from_u64(problem_seed(space.descriptor(), r, w, rho, seed));
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);

    let mut tmp = vec![0.0; n];
    let mut av = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut lambda = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_OUTER {
        next.copy_from_slice(&v);
        let scale = if lambda.is_finite() { 1.0 / lambda } else { 1.0 };
        next.iter_mut().for_each(|x| *x *= scale);
        cg(&op, &v, &mut next);
        let s = norm(&next);
        v.iter_mut().zip(&next).for_each(|(a, b)| *a = b / s);
        op.apply_sym(&v, &mut av, &mut tmp);
        lambda = dot(&v, &av);
        let u: Vec<f64> = (0..n).map(|i| v[i] / op.rho[i].sqrt()).collect();
        residual = op.generalized_residual(&u, lambda);
        if residual <= RESIDUAL_TOL {
            return Ok(GapResult {
                r,
                lambda_min: lambda,
                poincare_constant: 1.0 / lambda,
                iterations: it,
                residual,
                domain_size: n,
            });
        }
    }
    Err(SpectralError::NotConverged { iterations: MAX_OUTER, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn point_chain(space: &Space, pts: &[(&str, i64)]) -> Chain {
        let mut c = Chain::new(0).unwrap();
        for (p, v) in pts {
            c.add(vec![space.parse_point(p).unwrap()], rat(*v)).unwrap();
        }
        c
    }

    #[test]
    fn form_examples() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(2).unwrap();
        let e = point_chain(&z2, &[("0,0", 1)]);
        assert_eq!(quadratic_form(&e, &GrowthFunction::constant(), &ball).unwrap(), rat(8));
        let z1 = Space::parse("zd:1").unwrap();
        let ball = z1.ball(2).unwrap();
        let eta = point_chain(&z1, &[("-1", 1), ("0", 1), ("1", 1)]);
        assert_eq!(quadratic_form(&eta, &GrowthFunction::constant(), &ball).unwrap(), rat(4));
        let far = point_chain(&z1, &[("2", 1)]);
        assert!(matches!(
            quadratic_form(&far, &GrowthFunction::constant(), &ball),
            Err(SpectralError::SupportEscapes(_))
        ));
    }

    #[test]
    fn path_spectrum() {
        let z1 = Space::parse("zd:1").unwrap();
        for r in 0..=6 {
            let g = dirichlet_gap(&z1, r, &GrowthFunction::constant(), &VertexWeight::Unit, 0).unwrap();
            let oracle = 8.0 * (PI / (4.0 * r as f64 + 4.0)).sin().powi(2);
            assert!((g.lambda_min - oracle).abs() < 1e-9, "R = {r}");
        }
    }

    #[test]
    fn single_point() {
        let z2 = Space::parse("zd:2").unwrap();
        let lin = GrowthFunction::linear();
        let g = dirichlet_gap(&z2, 0, &lin, &VertexWeight::Reciprocal(lin.clone()), 0).unwrap();
        assert!((g.lambda_min - 2.0 * 4.0 * 2.0).abs() < 1e-12);
        assert_eq!(g.domain_size, 1);
    }
}
