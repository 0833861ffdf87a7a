//! Explicit controlled 1-chains: the line chain on `Z`, coset chains, spread
//! tails, rounding with greedy tail extraction, and the transfer from a
//! `1/f` primitive to a chain bounded below.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{format_rational, rat, to_f64, Chain, ChainError, GrowthFunction, Rational};
use crate::spaces::{BallIndex, PointCode, Space, SpaceError};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("boundary {value} at interior point `{point}` is below the required lower bound {bound}")]
    LowerBound { point: String, value: String, bound: String },
    #[error("boundary at interior point `{point}` is {value}, expected 1/f(|x|) = {expected}")]
    NotReciprocal { point: String, value: String, expected: String },
    #[error("chain of dimension {0} given where a 1-chain is required")]
    NotOneChain(usize),
    #[error("lower bound must be positive")]
    NonPositiveBound,
    #[error("coefficient too large for integer tail extraction")]
    Overflow,
    #[error("greedy tail got stuck at interior point `{0}`")]
    StuckTail(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// `Σ_{-R ≤ n < R} (-n)[n, n+1]` on `Z` (space `zd:1`), whose boundary is 1
/// at every `|n| < R`.
pub fn z_line_chain(radius: u32) -> Chain {
    let z = Space::parse("zd:1").expect("zd:1 parses");
    let r = radius as i64;
    let mut c = Chain::zero(1);
    for n in -r..r {
        let a = z.parse_point(&n.to_string()).unwrap();
        let b = z.parse_point(&(n + 1).to_string()).unwrap();
        c.add(vec![a, b], rat(-n)).unwrap();
    }
    c
}

/// Boundary of a 1-chain evaluated at every ball point, by ball index.
pub fn divergence(chain: &Chain, ball: &BallIndex) -> Result<Vec<Rational>> {
    if chain.dim() != 1 {
        return Err(ConstructionError::NotOneChain(chain.dim()));
    }
    let mut div = vec![Rational::zero(); ball.len()];
    for (s, c) in chain.iter() {
        let v = s.vertices();
        let a = ball.index_of(&v[0]).ok_or_else(|| ChainError::OutsideBall(format!("{:?}", v[0])))?;
        let b = ball.index_of(&v[1]).ok_or_else(|| ChainError::OutsideBall(format!("{:?}", v[1])))?;
        // ∂[a,b] = [b] - [a]
        div[b] += c;
        div[a] -= c;
    }
    Ok(div)
}

/// Chain from oriented index pairs `(a, b)` meaning `c·[p_a, p_b]`.
fn chain_from_indexed<I>(ball: &BallIndex, edges: I) -> Chain
where
    I: IntoIterator<Item = ((usize, usize), Rational)>,
{
    let mut c = Chain::zero(1);
    for ((a, b), v) in edges {
        c.add(vec![ball.point(a).clone(), ball.point(b).clone()], v).unwrap();
    }
    c
}

#[derive(Clone, Debug)]
pub struct CosetChain {
    pub chain: Chain,
    /// Points whose whole window fits in the ball; `∂ = 1` there.
    pub core: Vec<PointCode>,
    /// Number of cosets carrying a non-empty window.
    pub lines: usize,
    /// `(base, W)` for every coset meeting the ball, sorted by base.
    pub windows: Vec<(PointCode, u32)>,
}

/// The line chain copied along each coset `b·<g>` of the axis generator
/// meeting `B_R`, with the largest symmetric window `|n| ≤ W` inside `B_R`.
pub fn coset_chain(space: &Space, radius: u32) -> Result<CosetChain> {
    let ball = space.ball(radius)?;
    let mut bases = BTreeMap::new();
    for p in ball.points() {
        let line = &space.lines_through(&ball, p)?[0];
        bases.entry(line.base.clone()).or_insert(());
    }
    let mut chain = Chain::zero(1);
    let mut core = Vec::new();
    let mut windows = Vec::new();
    let mut lines = 0;
    for base in bases.into_keys() {
        let mut w = 0u32;
        loop {
            let next = w as i64 + 1;
            let plus = space.axis_shift(&base, next)?;
            let minus = space.axis_shift(&base, -next)?;
            if ball.contains(&plus) && ball.contains(&minus) {
                w += 1;
            } else {
                break;
            }
        }
        let wi = w as i64;
        for n in -wi..wi {
            let a = space.axis_shift(&base, n)?;
            let b = space.axis_shift(&base, n + 1)?;
            chain.add(vec![a, b], rat(-n))?;
        }
        for n in (1 - wi)..wi {
            core.push(space.axis_shift(&base, n)?);
        }
        if w > 0 {
            lines += 1;
        }
        windows.push((base, w));
    }
    core.sort();
    Ok(CosetChain { chain, core, lines, windows })
}

/// The ray of `δ` as ball-index pairs `(r_{k+1}, r_k)`, weight included by
/// the caller. Edges leaving the ball are dropped.
fn ray_edges(space: &Space, ball: &BallIndex, delta: usize) -> Result<(Vec<(usize, usize)>, Rational)> {
    let d = ball.point(delta);
    let line = space.lines_through(ball, d)?.remove(0);
    let dir = space.ray_direction(&line, d)?;
    let steps = ball.radius() + ball.length(delta) + 1;
    let mut edges = Vec::new();
    let mut prev = d.clone();
    let mut prev_idx = Some(delta);
    for _ in 0..steps {
        let next = space.axis_shift(&prev, dir)?;
        let next_idx = ball.index_of(&next);
        if let (Some(a), Some(b)) = (next_idx, prev_idx) {
            edges.push((a, b));
        }
        prev = next;
        prev_idx = next_idx;
    }
    Ok((edges, line.weight))
}

/// `t_δ` truncated to the ball: unit weight on each edge of the ray from `δ`
/// away from its line's base, oriented so that `∂t_δ = [δ]` away from the
/// truncation.
pub fn spread_tail(space: &Space, delta: &PointCode, ball: &BallIndex) -> Result<Chain> {
    let i = ball
        .index_of(delta)
        .ok_or_else(|| SpaceError::NotInBall(space.display(delta)))?;
    let (edges, w) = ray_edges(space, ball, i)?;
    Ok(chain_from_indexed(ball, edges.into_iter().map(|e| (e, w.clone()))))
}

#[derive(Clone, Debug)]
pub struct SpreadTailReport {
    pub chain: Chain,
    pub radius: u32,
    pub core_radius: u32,
    pub max_linear_ratio: Rational,
    /// Core points where `∂ψ ≠ 1`.
    pub boundary_defects: usize,
    /// Points outside the core where `∂ψ ≠ 1` (truncation effects).
    pub frontier_defects: usize,
    pub propagation: u32,
    /// Whether `|ψ(e)| ≤ 2|e| + 2` for every stored edge.
    pub linear_bound_holds: bool,
}

#[derive(Serialize)]
pub struct SpreadTailSummary {
    pub space: String,
    pub radius: u32,
    pub core_radius: u32,
    pub max_linear_ratio: String,
    pub max_linear_ratio_f64: f64,
    pub boundary_defects: usize,
    pub frontier_defects: usize,
    pub propagation: u32,
    pub linear_bound_holds: bool,
    pub edges: usize,
}

impl SpreadTailReport {
    pub fn summary(&self, space: &Space) -> SpreadTailSummary {
        SpreadTailSummary {
            space: space.descriptor().to_string(),
            radius: self.radius,
            core_radius: self.core_radius,
            max_linear_ratio: format_rational(&self.max_linear_ratio),
            max_linear_ratio_f64: to_f64(&self.max_linear_ratio),
            boundary_defects: self.boundary_defects,
            frontier_defects: self.frontier_defects,
            propagation: self.propagation,
            linear_bound_holds: self.linear_bound_holds,
            edges: self.chain.len(),
        }
    }
}

/// `ψ = Σ_{δ ∈ B_R} t_δ` with its exactness and growth audit. `∂ψ = 1` is
/// checked on the core `B_{⌊R/3⌋}`.
pub fn spread_tail_sum(space: &Space, ball: &BallIndex) -> Result<SpreadTailReport> {
    let per_delta: Vec<(Vec<(usize, usize)>, Rational)> = (0..ball.len())
        .into_par_iter()
        .map(|i| ray_edges(space, ball, i))
        .collect::<Result<_>>()?;
    // Every line has weight one, so integer counts suffice until the end.
    let mut weights: HashMap<Rational, HashMap<(usize, usize), i64>> = HashMap::new();
    for (edges, w) in per_delta {
        let acc = weights.entry(w).or_default();
        for (a, b) in edges {
            if a < b {
                *acc.entry((a, b)).or_default() += 1;
            } else {
                *acc.entry((b, a)).or_default() -= 1;
            }
        }
    }
    let mut field: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for (w, acc) in weights {
        for (e, n) in acc {
            *field.entry(e).or_insert_with(Rational::zero) += &w * rat(n);
        }
    }
    let two = rat(2);
    let mut max_ratio = Rational::zero();
    let mut bound_ok = true;
    for (&(a, b), c) in &field {
        let len = ball.length(a).max(ball.length(b));
        let r = c.abs() / rat(len as i64 + 1);
        if r > max_ratio {
            max_ratio = r;
        }
        if c.abs() > &two * rat(len as i64) + &two {
            bound_ok = false;
        }
    }
    let chain = chain_from_indexed(ball, field);
    let div = divergence(&chain, ball)?;
    let core_radius = ball.radius() / 3;
    let one = Rational::one();
    let (mut boundary_defects, mut frontier_defects) = (0, 0);
    for (i, d) in div.iter().enumerate() {
        if *d != one {
            if ball.length(i) <= core_radius {
                boundary_defects += 1;
            } else {
                frontier_defects += 1;
            }
        }
    }
    let propagation = chain.propagation(ball)?;
    Ok(SpreadTailReport {
        chain,
        radius: ball.radius(),
        core_radius,
        max_linear_ratio: max_ratio,
        boundary_defects,
        frontier_defects,
        propagation,
        linear_bound_holds: bound_ok,
    })
}

/// A unit path `x = p_0, p_1, ..., p_m` ending outside the interior; as a
/// chain it is `Σ [p_{k+1}, p_k]`, with boundary `[p_0] - [p_m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub path: Vec<PointCode>,
}

impl Tail {
    pub fn start(&self) -> &PointCode {
        &self.path[0]
    }

    pub fn end(&self) -> &PointCode {
        self.path.last().unwrap()
    }

    pub fn to_chain(&self) -> Chain {
        let mut c = Chain::zero(1);
        for w in self.path.windows(2) {
            c.add(vec![w[1].clone(), w[0].clone()], Rational::one()).unwrap();
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct RoundedTails {
    pub kappa: Rational,
    /// Largest `#B(x, P)` over interior points.
    pub neighborhood_bound: usize,
    pub rounded: Chain,
    pub tails: Vec<Tail>,
    /// `rounded - Σ tails`.
    pub remainder: Chain,
    /// Smallest `∂(rounded)` over interior points (`None` if no interior).
    pub min_boundary: Option<i64>,
}

fn floor_or_ceil(v: &Rational) -> Result<i64> {
    let r: BigInt = if v.is_negative() { v.floor().to_integer() } else { v.ceil().to_integer() };
    r.to_i64().ok_or(ConstructionError::Overflow)
}

fn ball_count(ball: &BallIndex, x: usize, p: u32) -> usize {
    let mut seen = HashMap::from([(x, 0u32)]);
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        let d = seen[&u];
        if d == p {
            continue;
        }
        for &v in ball.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(v) {
                e.insert(d + 1);
                queue.push_back(v);
            }
        }
    }
    seen.len()
}

/// Scales `ψ` (with `∂ψ ≥ C` on the interior) by `κ = (N+1)/C`, rounds
/// away from zero to an integer chain with `∂ ≥ 1` on the interior, and
/// peels off one unit tail per interior point by following edges with
/// coefficient `ψ'(y, x) ≥ 1` until the frontier.
pub fn round_and_extract_tails(psi: &Chain, lower: &Rational, ball: &BallIndex, space: &Space) -> Result<RoundedTails> {
    if !lower.is_positive() {
        return Err(ConstructionError::NonPositiveBound);
    }
    let div = divergence(psi, ball)?;
    for i in ball.interior_indices() {
        if &div[i] < lower {
            return Err(ConstructionError::LowerBound {
                point: space.display(ball.point(i)),
                value: format_rational(&div[i]),
                bound: format_rational(lower),
            });
        }
    }
    let p = psi.propagation(ball)?;
    let n = ball.interior_indices().map(|x| ball_count(ball, x, p)).max().unwrap_or(0);
    let kappa = rat(n as i64 + 1) / lower;

    // residual field on index pairs a < b, value of [p_a, p_b]
    let mut field: HashMap<(usize, usize), i64> = HashMap::new();
    let mut rounded = Chain::zero(1);
    for (s, c) in psi.iter() {
        let v = floor_or_ceil(&(c * &kappa))?;
        let (a, b) = (ball.index_of(&s.vertices()[0]).unwrap(), ball.index_of(&s.vertices()[1]).unwrap());
        rounded.add(s.vertices().to_vec(), rat(v))?;
        if v != 0 {
            if a < b {
                field.insert((a, b), v);
            } else {
                field.insert((b, a), -v);
            }
        }
    }
    let rdiv = divergence(&rounded, ball)?;
    let min_boundary = ball
        .interior_indices()
        .map(|i| rdiv[i].to_integer().to_i64().unwrap_or(i64::MIN))
        .min();

    // value of [y, x]
    let get = |field: &HashMap<(usize, usize), i64>, y: usize, x: usize| -> i64 {
        if y < x {
            field.get(&(y, x)).copied().unwrap_or(0)
        } else {
            -field.get(&(x, y)).copied().unwrap_or(0)
        }
    };
    let mut tails = Vec::new();
    let interior: Vec<usize> = ball.interior_indices().collect();
    for x in interior {
        let mut path = vec![x];
        let mut cur = x;
        while ball.is_interior(cur) {
            let next = ball
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&y| get(&field, y, cur) >= 1)
                .ok_or_else(|| ConstructionError::StuckTail(space.display(ball.point(cur))))?;
            if next < cur {
                *field.get_mut(&(next, cur)).unwrap() -= 1;
            } else {
                *field.get_mut(&(cur, next)).unwrap() += 1;
            }
            path.push(next);
            cur = next;
        }
        tails.push(Tail { path: path.into_iter().map(|i| ball.point(i).clone()).collect() });
    }
    let mut entries: Vec<_> = field.into_iter().filter(|(_, v)| *v != 0).collect();
    entries.sort();
    let remainder = chain_from_indexed(ball, entries.into_iter().map(|(e, v)| (e, rat(v))));
    Ok(RoundedTails {
        kappa,
        neighborhood_bound: n,
        rounded,
        tails,
        remainder,
        min_boundary,
    })
}

#[derive(Clone, Debug)]
pub struct Transfer {
    pub chain: Chain,
    /// Smallest `∂ψ` over interior points.
    pub min_boundary: Option<Rational>,
    /// Largest length of an interior point with `∂ψ < C`; `None` if none.
    pub inspected_radius: Option<u32>,
    /// Interior points of length at most `inspected_radius`.
    pub inspected: Vec<PointCode>,
    pub growth_psi: Rational,
    pub growth_phi: Rational,
}

/// `ψ(x, y) = φ(x, y)·f(|(x, y)|)` for `φ` with `∂φ = 1/f(|x|)` on the
/// interior.
pub fn transfer_over_f(phi: &Chain, f: &GrowthFunction, target: &Rational, ball: &BallIndex, space: &Space) -> Result<Transfer> {
    let div = divergence(phi, ball)?;
    for i in ball.interior_indices() {
        let expected = Rational::one() / f.eval(ball.length(i));
        if div[i] != expected {
            let close = !f.is_exact() && (to_f64(&div[i]) - 1.0 / f.eval_f64(ball.length(i))).abs() <= 1e-9;
            if !close {
                return Err(ConstructionError::NotReciprocal {
                    point: space.display(ball.point(i)),
                    value: format_rational(&div[i]),
                    expected: format_rational(&expected),
                });
            }
        }
    }
    let mut psi = Chain::zero(1);
    for (s, c) in phi.iter() {
        let len = crate::chains::simplex_length(ball, s.vertices())?;
        psi.add(s.vertices().to_vec(), c * f.eval(len))?;
    }
    let pdiv = divergence(&psi, ball)?;
    let min_boundary = ball.interior_indices().map(|i| pdiv[i].clone()).min();
    let inspected_radius = ball
        .interior_indices()
        .filter(|&i| &pdiv[i] < target)
        .map(|i| ball.length(i))
        .max();
    let inspected = match inspected_radius {
        Some(r) => ball
            .interior_indices()
            .filter(|&i| ball.length(i) <= r)
            .map(|i| ball.point(i).clone())
            .collect(),
        None => Vec::new(),
    };
    Ok(Transfer {
        growth_psi: psi.growth_constant(f, ball)?,
        growth_phi: phi.growth_constant(&GrowthFunction::constant(), ball)?,
        chain: psi,
        min_boundary,
        inspected_radius,
        inspected,
    })
}

/// Raises `∂ψ` to at least `C` on the given points by adding
/// `(C - ∂ψ(x))` times a shortest path from `x` to the frontier.
pub fn patch_with_tails(psi: &Chain, lower: &Rational, points: &[PointCode], ball: &BallIndex) -> Result<Chain> {
    let div = divergence(psi, ball)?;
    let mut out = psi.clone();
    for p in points {
        let x = ball.index_of(p).ok_or_else(|| ChainError::OutsideBall(format!("{p:?}")))?;
        let deficit = lower - &div[x];
        if !deficit.is_positive() {
            continue;
        }
        let path = path_to_frontier(ball, x);
        let tail = Tail { path: path.into_iter().map(|i| ball.point(i).clone()).collect() };
        out.add_chain(&tail.to_chain().scaled(&deficit))?;
    }
    Ok(out)
}

fn path_to_frontier(ball: &BallIndex, x: usize) -> Vec<usize> {
    let mut parent = HashMap::from([(x, x)]);
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if !ball.is_interior(u) {
            let mut path = vec![u];
            let mut cur = u;
            while cur != x {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return path;
        }
        for &v in ball.neighbors(u) {
            parent.entry(v).or_insert_with(|| {
                queue.push_back(v);
                u
            });
        }
    }
    vec![x]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::ratio;

    #[test]
    fn line_chain_boundary() {
        let z = Space::parse("zd:1").unwrap();
        for r in 1..6u32 {
            let c = z_line_chain(r);
            let ball = z.ball(r).unwrap();
            let div = divergence(&c, &ball).unwrap();
            for i in 0..ball.len() {
                if ball.length(i) < r {
                    assert_eq!(div[i], rat(1));
                } else {
                    assert_ne!(div[i], rat(1));
                }
            }
            assert!(c.growth_constant(&GrowthFunction::linear(), &ball).unwrap() < rat(1));
        }
        let c1 = z_line_chain(1);
        assert_eq!(c1.len(), 1);
        assert_eq!(c1.coefficient(&[z.parse_point("-1").unwrap(), z.parse_point("0").unwrap()]), rat(1));
    }

    #[test]
    fn coset_chain_zd() {
        let z = Space::parse("zd:1").unwrap();
        assert_eq!(coset_chain(&z, 4).unwrap().chain, z_line_chain(4));

        let z2 = Space::parse("zd:2").unwrap();
        let cc = coset_chain(&z2, 4).unwrap();
        let ball = z2.ball(4).unwrap();
        let div = divergence(&cc.chain, &ball).unwrap();
        for p in &cc.core {
            assert_eq!(div[ball.index_of(p).unwrap()], rat(1));
        }
        // row y = k has window 4 - |k|; core has |x| < 4 - |k|
        assert_eq!(cc.core.len(), 7 + 2 * (5 + 3 + 1));
    }

    #[test]
    fn single_tail() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(6).unwrap();
        let d = z2.parse_point("2,3").unwrap();
        let t = spread_tail(&z2, &d, &ball).unwrap();
        assert_eq!(t.len(), 1);
        let e = [z2.parse_point("3,3").unwrap(), d.clone()];
        assert_eq!(t.coefficient(&e), rat(1));
        let div = divergence(&t, &ball).unwrap();
        assert_eq!(div[ball.index_of(&d).unwrap()], rat(1));

        let o = z2.basepoint();
        let t0 = spread_tail(&z2, &o, &ball).unwrap();
        assert_eq!(t0.len(), 6);
        let div = divergence(&t0, &ball).unwrap();
        assert_eq!(div[0], rat(1));
    }

    #[test]
    fn spread_sum_zd2_counts() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(9).unwrap();
        let rep = spread_tail_sum(&z2, &ball).unwrap();
        assert_eq!(rep.boundary_defects, 0);
        assert_eq!(rep.propagation, 1);
        assert!(rep.linear_bound_holds);
        // edge ((n,k),(n+1,k)), n ≥ 0 carries n+1 where the ball is not truncating
        for (n, k) in [(0, 0), (1, 1), (2, 0), (0, 2)] {
            let a = z2.parse_point(&format!("{n},{k}")).unwrap();
            let b = z2.parse_point(&format!("{},{k}", n + 1)).unwrap();
            assert_eq!(rep.chain.coefficient(&[b, a]).abs(), rat(n + 1), "({n},{k})");
        }
    }

    #[test]
    fn rounding_and_tails_on_line() {
        let z = Space::parse("zd:1").unwrap();
        let ball = z.ball(4).unwrap();
        let psi = z_line_chain(4);
        let rt = round_and_extract_tails(&psi, &rat(1), &ball, &z).unwrap();
        assert_eq!(rt.neighborhood_bound, 3);
        assert_eq!(rt.kappa, rat(4));
        assert!(rt.min_boundary.unwrap() >= 1);
        assert_eq!(rt.tails.len(), 7);
        let mut sum = rt.remainder.clone();
        for t in &rt.tails {
            sum.add_chain(&t.to_chain()).unwrap();
            assert!(!ball.is_interior(ball.index_of(t.end()).unwrap()));
            // straight escape
            let lens: Vec<u32> = t.path.iter().map(|p| ball.length_of(p).unwrap()).collect();
            assert!(lens.windows(2).all(|w| w[1] == w[0] + 1) || lens[0] == 0);
        }
        assert_eq!(sum, rt.rounded);

        let too_weak = psi.scaled(&ratio(1, 2));
        assert!(matches!(
            round_and_extract_tails(&too_weak, &rat(1), &ball, &z),
            Err(ConstructionError::LowerBound { .. })
        ));

        let tiny = z.ball(0).unwrap();
        let rt = round_and_extract_tails(&Chain::zero(1), &rat(1), &tiny, &z).unwrap();
        assert!(rt.tails.is_empty());
    }

    #[test]
    fn transfer_const_is_identity() {
        let z = Space::parse("zd:1").unwrap();
        let ball = z.ball(3).unwrap();
        let phi = z_line_chain(3);
        let t = transfer_over_f(&phi, &GrowthFunction::constant(), &ratio(1, 2), &ball, &z).unwrap();
        assert_eq!(t.chain, phi);
        assert_eq!(t.inspected_radius, None);

        let bad = GrowthFunction::linear();
        assert!(matches!(
            transfer_over_f(&phi, &bad, &ratio(1, 2), &ball, &z),
            Err(ConstructionError::NotReciprocal { .. })
        ));
    }
}
