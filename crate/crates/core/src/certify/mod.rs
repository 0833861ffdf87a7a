//! Truncated divergence problems: does a 1-chain `ψ` with `∂ψ = s` on the
//! interior of a ball and `|ψ(e)| ≤ K·g(|e|)` exist? Answered by max-flow,
//! with either the chain or a min-cut set violating the isoperimetric
//! inequality at `K`.

mod flow;
mod search;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::chains::{format_rational, rat, to_f64, Chain, ChainError, GrowthFunction, Rational};
use crate::profiles::{edge_boundary, vertex_boundary, ProfileError};
use crate::spaces::{BallIndex, PointCode, Space, SpaceError};

use flow::{FlowNet, INF};

pub use search::{
    min_feasible_k, min_feasible_k_for, min_feasible_k_in, sweep, trend_slope, vanishing_evidence, Evidence, EvidenceRow, KSearch,
    SearchOptions, SupplyKind, Verdict, GROWING_SLOPE,
};

/// Default fixed-point factor when exact scaling does not fit.
pub const DEFAULT_SCALE: u64 = 1_000_000;

/// Largest common denominator used for exact integer scaling.
const EXACT_SCALE_LIMIT: u128 = 1 << 64;

/// Largest scaled capacity accepted.
const CAPACITY_LIMIT: i128 = 1 << 100;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("scaled capacities overflow; lower the scale or the radius")]
    Overflow,
    #[error("K must be non-negative")]
    NegativeK,
    #[error("supply is given at `{0}`, which is not an interior point of the ball")]
    SupplyOffInterior(String),
    #[error("no feasible K found after {0} doublings; capacities may vanish identically")]
    NoFeasibleK(u32),
    #[error("fixed-point rounding left the cut inconclusive at K = {0}; raise --scale")]
    Inconclusive(String),
    #[error("K_R decreased from R = {r} to R = {next}: {detail}")]
    NotMonotone { r: u32, next: u32, detail: String },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

type Result<T> = std::result::Result<T, CertifyError>;

/// Supply on interior points and the capacity rule `K·g(|e|)`.
#[derive(Clone, Debug)]
pub struct DivergenceProblem<'a> {
    pub ball: &'a BallIndex,
    /// `s(x)` by ball index; frontier entries must be zero.
    pub supply: Vec<Rational>,
    pub k: Rational,
    pub g: GrowthFunction,
    /// Fixed-point factor used only when exact scaling is out of range.
    pub scale: u64,
}

impl<'a> DivergenceProblem<'a> {
    /// The fundamental class: `s ≡ 1` on the interior.
    pub fn fundamental(ball: &'a BallIndex, k: Rational, g: GrowthFunction) -> Self {
        let supply = (0..ball.len())
            .map(|i| if ball.is_interior(i) { Rational::one() } else { Rational::zero() })
            .collect();
        DivergenceProblem { ball, supply, k, g, scale: DEFAULT_SCALE }
    }

    /// `s(x) = 1/f(|x|)` on the interior.
    pub fn reciprocal(ball: &'a BallIndex, f: &GrowthFunction, k: Rational, g: GrowthFunction) -> Self {
        let supply = (0..ball.len())
            .map(|i| {
                if ball.is_interior(i) {
                    Rational::one() / f.eval(ball.length(i))
                } else {
                    Rational::zero()
                }
            })
            .collect();
        DivergenceProblem { ball, supply, k, g, scale: DEFAULT_SCALE }
    }

    /// Supplies read from a 0-chain supported on the interior.
    pub fn from_chain(ball: &'a BallIndex, c: &Chain, k: Rational, g: GrowthFunction) -> Result<Self> {
        if c.dim() != 0 {
            return Err(ChainError::DimensionMismatch(0, c.dim()).into());
        }
        let mut supply = vec![Rational::zero(); ball.len()];
        for (s, v) in c.iter() {
            let p = &s.vertices()[0];
            match ball.index_of(p) {
                Some(i) if ball.is_interior(i) => supply[i] = v.clone(),
                _ => return Err(CertifyError::SupplyOffInterior(format!("{p:?}"))),
            }
        }
        Ok(DivergenceProblem { ball, supply, k, g, scale: DEFAULT_SCALE })
    }

    pub fn with_k(&self, k: Rational) -> Self {
        DivergenceProblem { k, ..self.clone() }
    }

    pub fn with_scale(mut self, scale: u64) -> Self {
        self.scale = scale.max(1);
        self
    }

    /// `K·g(|e|)` for an edge between ball indices.
    pub fn capacity(&self, a: usize, b: usize) -> Rational {
        &self.k * self.g.eval(self.ball.length(a).max(self.ball.length(b)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "factor", rename_all = "lowercase")]
pub enum Scaling {
    /// Common denominator of all capacities and supplies: no rounding.
    Exact(String),
    /// Fixed factor; capacities floored, supplies rounded half up.
    Fixed(u64),
}

#[derive(Clone, Debug)]
pub struct FlowCertificate {
    pub chain: Chain,
    /// `min_e (K·g(|e|) - |ψ(e)|)`; `None` without edges.
    pub slack: Option<Rational>,
    pub k: Rational,
    pub scaling: Scaling,
}

#[derive(Clone, Debug)]
pub struct CutWitness {
    /// Ball indices of `A`, all interior.
    pub indices: Vec<usize>,
    pub points: Vec<PointCode>,
    /// `Σ_{x ∈ A} s(x)`; negative when the violation is on the demand side.
    pub supply_sum: Rational,
    /// `Σ_{e ∈ ∂ᵉA} g(|e|)`
    pub edge_capacity_sum: Rational,
    /// `Σ_{x ∈ ∂A} g(|x|)`
    pub vertex_form_sum: Rational,
    pub k: Rational,
}

impl CutWitness {
    /// `|Σ_A s| / Σ_{∂ᵉA} g`: the smallest `K` this set does not refute.
    pub fn edge_ratio(&self) -> Rational {
        if self.edge_capacity_sum.is_zero() {
            return Rational::zero();
        }
        self.supply_sum.abs() / &self.edge_capacity_sum
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Feasible(FlowCertificate),
    Infeasible(CutWitness),
}

impl Outcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible(_))
    }
}

fn lcm_of_denominators<'x>(values: impl Iterator<Item = &'x Rational>) -> Option<BigInt> {
    let limit = BigInt::from(EXACT_SCALE_LIMIT);
    let mut l = BigInt::one();
    for v in values {
        l = l.lcm(v.denom());
        if l > limit {
            return None;
        }
    }
    Some(l)
}

fn to_i128(v: &BigInt) -> Result<i128> {
    match v.to_i128() {
        Some(x) if x.abs() <= CAPACITY_LIMIT => Ok(x),
        _ => Err(CertifyError::Overflow),
    }
}

/// Solves the truncated divergence problem by max-flow.
///
/// Network: ball points, one merged frontier node `Φ` joined to every
/// frontier point in both directions without limit, a source feeding each
/// positive supply and a sink draining each negative one; `Φ` absorbs the
/// net total. Each ball edge is an undirected arc of capacity `K·g(|e|)`.
pub fn solve(problem: &DivergenceProblem) -> Result<Outcome> {
    if problem.k.is_negative() {
        return Err(CertifyError::NegativeK);
    }
    let ball = problem.ball;
    for i in 0..ball.len() {
        if !ball.is_interior(i) && !problem.supply[i].is_zero() {
            return Err(CertifyError::SupplyOffInterior(format!("{:?}", ball.point(i))));
        }
    }
    let caps_by_len: Vec<Rational> = (0..=ball.radius()).map(|t| &problem.k * problem.g.eval(t)).collect();
    let exact = lcm_of_denominators(caps_by_len.iter().chain(problem.supply.iter()));
    let (factor, scaling) = match exact {
        Some(l) => {
            let s = l.to_string();
            (l, Scaling::Exact(s))
        }
        None => (BigInt::from(problem.scale), Scaling::Fixed(problem.scale)),
    };
    let factor_r = Rational::from_integer(factor.clone());
    let scaled_caps: Vec<i128> = caps_by_len
        .iter()
        .map(|c| to_i128(&(c * &factor_r).floor().to_integer()))
        .collect::<Result<_>>()?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let scaled_supply: Vec<i128> = problem
        .supply
        .iter()
        .map(|s| to_i128(&(s * &factor_r + &half).floor().to_integer()))
        .collect::<Result<_>>()?;

    let n = ball.len();
    let (phi, src, snk) = (n, n + 1, n + 2);
    let mut net = FlowNet::new(n + 3);
    let mut edge_arcs = Vec::new();
    for (a, b) in ball.edges() {
        if !ball.is_interior(a) && !ball.is_interior(b) {
            continue;
        }
        let c = scaled_caps[ball.length(a).max(ball.length(b)) as usize];
        edge_arcs.push((a, b, net.add(a, b, c, c), c));
    }
    let mut total = 0i128;
    let mut required = 0i128;
    for i in 0..n {
        if !ball.is_interior(i) {
            net.add(i, phi, INF, INF);
            continue;
        }
        let s = scaled_supply[i];
        total += s;
        if s > 0 {
            net.add(src, i, s, 0);
            required += s;
        } else if s < 0 {
            net.add(i, snk, -s, 0);
        }
    }
    if total > 0 {
        net.add(phi, snk, total, 0);
    } else if total < 0 {
        net.add(src, phi, -total, 0);
        required += -total;
    }
    let value = net.max_flow(src, snk);

    if value == required {
        let mut chain = Chain::zero(1);
        let mut slack: Option<Rational> = None;
        for &(a, b, arc, c) in &edge_arcs {
            let through = c - net.residual(arc);
            let psi = Rational::new(BigInt::from(through), factor.clone());
            // flow a → b is the coefficient of [b, a]
            chain.add(vec![ball.point(b).clone(), ball.point(a).clone()], psi.clone())?;
            let s = problem.capacity(a, b) - psi.abs();
            slack = Some(match slack {
                Some(m) if m <= s => m,
                _ => s,
            });
        }
        return Ok(Outcome::Feasible(FlowCertificate { chain, slack, k: problem.k.clone(), scaling }));
    }

    let side = net.reachable(src);
    let indices: Vec<usize> = if !side[phi] {
        (0..n).filter(|&i| ball.is_interior(i) && side[i]).collect()
    } else {
        (0..n).filter(|&i| ball.is_interior(i) && !side[i]).collect()
    };
    let witness = build_witness(problem, indices)?;
    if witness.supply_sum.abs() <= &problem.k * &witness.edge_capacity_sum {
        return match scaling {
            Scaling::Fixed(_) => Err(CertifyError::Inconclusive(format_rational(&problem.k))),
            Scaling::Exact(_) => Err(CertifyError::Internal("min cut does not violate the inequality".into())),
        };
    }
    Ok(Outcome::Infeasible(witness))
}

fn build_witness(problem: &DivergenceProblem, indices: Vec<usize>) -> Result<CutWitness> {
    let ball = problem.ball;
    let supply_sum: Rational = indices.iter().map(|&i| problem.supply[i].clone()).sum();
    let edge_capacity_sum: Rational = edge_boundary(ball, &indices)?
        .iter()
        .map(|&(a, b)| problem.g.eval(ball.length(a).max(ball.length(b))))
        .sum();
    let vertex_form_sum: Rational = vertex_boundary(ball, &indices)?
        .iter()
        .map(|&x| problem.g.eval(ball.length(x)))
        .sum();
    Ok(CutWitness {
        points: indices.iter().map(|&i| ball.point(i).clone()).collect(),
        indices,
        supply_sum,
        edge_capacity_sum,
        vertex_form_sum,
        k: problem.k.clone(),
    })
}

/// Block–Weinberger–Whyte check: signed supplies from `c`, `g ≡ 1`.
pub fn bww_check(ball: &BallIndex, c: &Chain, k: Rational) -> Result<Outcome> {
    solve(&DivergenceProblem::from_chain(ball, c, k, GrowthFunction::constant())?)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub set_size: usize,
    pub supply_sum: String,
    pub edge_capacity_sum: String,
    pub vertex_form_sum: String,
    pub k: String,
    /// Recomputed sums agree with the witness.
    pub consistent: bool,
    /// All points of `A` are interior, so `A` is a genuine finite subset.
    pub interior_only: bool,
    /// `|Σ_A s| > K·Σ_{∂ᵉA} g(|e|)`
    pub strict_violation: bool,
    /// `|Σ_A s| / Σ_{∂A} g(|x|)`, comparable with the vertex-form inequality.
    pub vertex_ratio: String,
    pub vertex_ratio_f64: f64,
    pub edge_ratio: String,
    pub edge_ratio_f64: f64,
    pub max_degree: usize,
    /// `Σ_{∂ᵉA} g ≤ deg·Σ_{∂A} g` and `Σ_{∂A} g ≤ 2·Σ_{∂ᵉA} g`.
    pub conversion_holds: bool,
    pub passed: bool,
}

/// Recomputes a witness from scratch in exact arithmetic.
pub fn witness_audit(w: &CutWitness, problem: &DivergenceProblem) -> Result<AuditReport> {
    let ball = problem.ball;
    let indices: Vec<usize> = w
        .points
        .iter()
        .map(|p| ball.index_of(p).ok_or_else(|| CertifyError::Internal("witness point outside ball".into())))
        .collect::<Result<_>>()?;
    let interior_only = indices.iter().all(|&i| ball.is_interior(i));
    let fresh = build_witness(&problem.with_k(w.k.clone()), indices)?;
    let consistent = fresh.supply_sum == w.supply_sum
        && fresh.edge_capacity_sum == w.edge_capacity_sum
        && fresh.vertex_form_sum == w.vertex_form_sum;
    let strict = fresh.supply_sum.abs() > &w.k * &fresh.edge_capacity_sum;
    let vertex_ratio = if fresh.vertex_form_sum.is_zero() {
        Rational::zero()
    } else {
        fresh.supply_sum.abs() / &fresh.vertex_form_sum
    };
    let edge_ratio = fresh.edge_ratio();
    let deg = ball.max_degree();
    let conversion = fresh.edge_capacity_sum <= rat(deg as i64) * &fresh.vertex_form_sum
        && fresh.vertex_form_sum <= rat(2) * &fresh.edge_capacity_sum;
    Ok(AuditReport {
        set_size: w.points.len(),
        supply_sum: format_rational(&fresh.supply_sum),
        edge_capacity_sum: format_rational(&fresh.edge_capacity_sum),
        vertex_form_sum: format_rational(&fresh.vertex_form_sum),
        k: format_rational(&w.k),
        consistent,
        interior_only,
        strict_violation: strict,
        vertex_ratio: format_rational(&vertex_ratio),
        vertex_ratio_f64: to_f64(&vertex_ratio),
        edge_ratio: format_rational(&edge_ratio),
        edge_ratio_f64: to_f64(&edge_ratio),
        max_degree: deg,
        conversion_holds: conversion,
        passed: consistent && interior_only && strict && conversion,
    })
}

/// Checks a feasible certificate: exact boundary on the interior and
/// capacity slack.
pub fn certificate_audit(cert: &FlowCertificate, problem: &DivergenceProblem) -> Result<bool> {
    let ball = problem.ball;
    let div = crate::constructions::divergence(&cert.chain, ball)
        .map_err(|e| CertifyError::Internal(e.to_string()))?;
    let tolerance = match cert.scaling {
        Scaling::Exact(_) => Rational::zero(),
        Scaling::Fixed(s) => Rational::new(BigInt::one(), BigInt::from(s)),
    };
    let boundary_ok = ball
        .interior_indices()
        .all(|i| (&div[i] - &problem.supply[i]).abs() <= tolerance);
    let cap_ok = cert.chain.iter().all(|(s, c)| {
        let a = ball.index_of(&s.vertices()[0]).unwrap();
        let b = ball.index_of(&s.vertices()[1]).unwrap();
        c.abs() <= problem.capacity(a, b)
    });
    Ok(boundary_ok && cap_ok)
}

/// JSON view of an outcome.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeSummary {
    pub radius: u32,
    pub k: String,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub points: Vec<String>,
    pub supply_sum: String,
    pub edge_capacity_sum: String,
    pub vertex_form_sum: String,
}

impl Outcome {
    pub fn summary(&self, space: &Space, ball: &BallIndex) -> OutcomeSummary {
        match self {
            Outcome::Feasible(c) => OutcomeSummary {
                radius: ball.radius(),
                k: format_rational(&c.k),
                feasible: true,
                slack: c.slack.as_ref().map(format_rational),
                scaling: Some(c.scaling.clone()),
                chain_edges: Some(c.chain.len()),
                witness: None,
            },
            Outcome::Infeasible(w) => OutcomeSummary {
                radius: ball.radius(),
                k: format_rational(&w.k),
                feasible: false,
                slack: None,
                scaling: None,
                chain_edges: None,
                witness: Some(WitnessSummary {
                    points: w.points.iter().map(|p| space.display(p)).collect(),
                    supply_sum: format_rational(&w.supply_sum),
                    edge_capacity_sum: format_rational(&w.edge_capacity_sum),
                    vertex_form_sum: format_rational(&w.vertex_form_sum),
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::ratio;

    fn z(r: u32) -> (Space, BallIndex) {
        let s = Space::parse("zd:1").unwrap();
        let b = s.ball(r).unwrap();
        (s, b)
    }

    #[test]
    fn line_const() {
        let (_, ball) = z(5);
        let p = DivergenceProblem::fundamental(&ball, rat(5), GrowthFunction::constant());
        match solve(&p).unwrap() {
            Outcome::Feasible(c) => {
                assert!(certificate_audit(&c, &p).unwrap());
                assert!(c.slack.unwrap() >= rat(0));
            }
            Outcome::Infeasible(_) => panic!("K = 5 is feasible"),
        }
        match solve(&p.with_k(rat(4))).unwrap() {
            Outcome::Infeasible(w) => {
                assert_eq!(w.points.len(), 9);
                assert_eq!(w.edge_capacity_sum, rat(2));
                assert_eq!(w.supply_sum, rat(9));
                let audit = witness_audit(&w, &p).unwrap();
                assert!(audit.passed);
                assert_eq!(audit.vertex_ratio, "9/4");
            }
            Outcome::Feasible(_) => panic!("K = 4 is infeasible"),
        }
    }

    #[test]
    fn line_linear() {
        let (_, ball) = z(5);
        let p = DivergenceProblem::fundamental(&ball, ratio(3, 4), GrowthFunction::linear());
        let out = solve(&p).unwrap();
        let Outcome::Feasible(c) = out else { panic!("0.75 feasible") };
        assert!(certificate_audit(&c, &p).unwrap());
        let Outcome::Infeasible(w) = solve(&p.with_k(ratio(7, 10))).unwrap() else { panic!("0.7 infeasible") };
        assert!(witness_audit(&w, &p.with_k(ratio(7, 10))).unwrap().passed);
    }

    #[test]
    fn empty_interior() {
        let (_, ball) = z(0);
        let p = DivergenceProblem::fundamental(&ball, rat(0), GrowthFunction::constant());
        let Outcome::Feasible(c) = solve(&p).unwrap() else { panic!() };
        assert!(c.chain.is_empty());
    }

    #[test]
    fn signed_supplies() {
        let (s, ball) = z(4);
        let mut c = Chain::new(0).unwrap();
        c.add(vec![s.parse_point("1").unwrap()], rat(1)).unwrap();
        c.add(vec![s.parse_point("-1").unwrap()], rat(-1)).unwrap();
        // a dipole needs flow 1 across two edges
        assert!(bww_check(&ball, &c, rat(1)).unwrap().is_feasible());
        let Outcome::Infeasible(w) = bww_check(&ball, &c, ratio(1, 3)).unwrap() else { panic!() };
        let p = DivergenceProblem::from_chain(&ball, &c, ratio(1, 3), GrowthFunction::constant()).unwrap();
        assert!(witness_audit(&w, &p).unwrap().passed);
        assert!(bww_check(&ball, &Chain::new(0).unwrap(), rat(0)).unwrap().is_feasible());
        let mut off = Chain::new(0).unwrap();
        off.add(vec![s.parse_point("4").unwrap()], rat(1)).unwrap();
        assert!(matches!(bww_check(&ball, &off, rat(1)), Err(CertifyError::SupplyOffInterior(_))));
    }
}
