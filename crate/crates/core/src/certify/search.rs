//! Parametric search for the least feasible `K` and sweeps over radii.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{solve, CertifyError, CutWitness, DivergenceProblem, FlowCertificate, Outcome, Result, DEFAULT_SCALE};
use crate::chains::{format_rational, rat, to_f64, GrowthFunction, Rational};
use crate::spaces::{BallIndex, Space};

const DOUBLING_GUARD: u32 = 60;
const REFINE_GUARD: usize = 64;

/// Which 0-chain is pushed through the network.
#[derive(Clone, Debug)]
pub enum SupplyKind {
    /// The fundamental class.
    Ones,
    /// `1/f(|x|)`
    Reciprocal(GrowthFunction),
}

impl SupplyKind {
    fn problem<'a>(&self, ball: &'a BallIndex, k: Rational, g: GrowthFunction) -> DivergenceProblem<'a> {
        match self {
            SupplyKind::Ones => DivergenceProblem::fundamental(ball, k, g),
            SupplyKind::Reciprocal(f) => DivergenceProblem::reciprocal(ball, f, k, g),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KSearch {
    pub radius: u32,
    /// Largest `K` known infeasible (0 if none was).
    pub lower: Rational,
    /// Smallest `K` known feasible.
    pub upper: Rational,
    /// Midpoint of the final bracket.
    pub estimate: Rational,
    /// The minimum itself, when the cut refinement closed the bracket.
    pub exact: Option<Rational>,
    /// Flow at `upper`.
    pub certificate: FlowCertificate,
    /// Cut at `lower`, if any `K` was infeasible.
    pub witness: Option<CutWitness>,
    pub solves: usize,
}

impl KSearch {
    /// `exact` when known, otherwise the bracket midpoint.
    pub fn value(&self) -> &Rational {
        self.exact.as_ref().unwrap_or(&self.estimate)
    }
}

/// Smallest `K` making `problem` feasible, to relative width `rel_tol`.
///
/// Doubling from `K = 1` brackets the minimum. Each infeasible solve hands
/// back a set whose ratio `|Σ_A s| / Σ_{∂ᵉA} g` is a lower bound; solving at
/// that ratio either succeeds, which pins the minimum exactly, or returns a
/// strictly worse set. Bisection covers the case where this does not settle.
pub fn min_feasible_k_for(problem: &DivergenceProblem, rel_tol: f64) -> Result<KSearch> {
    let radius = problem.ball.radius();
    let mut solves = 0usize;
    let mut run = |k: &Rational| -> Result<Outcome> {
        solves += 1;
        solve(&problem.with_k(k.clone()))
    };

    if let Outcome::Feasible(c) = run(&Rational::zero())? {
        return Ok(KSearch {
            radius,
            lower: Rational::zero(),
            upper: Rational::zero(),
            estimate: Rational::zero(),
            exact: Some(Rational::zero()),
            certificate: c,
            witness: None,
            solves: 1,
        });
    }

    let tol = Rational::from_float(rel_tol.max(1e-12)).unwrap_or_else(|| Rational::new(1.into(), 10000.into()));
    let mut lower = Rational::zero();
    let mut witness: Option<CutWitness> = None;
    let mut upper: Option<(Rational, FlowCertificate)> = None;
    let mut k = Rational::one();
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > DOUBLING_GUARD {
            return Err(CertifyError::NoFeasibleK(DOUBLING_GUARD));
        }
        match run(&k)? {
            Outcome::Feasible(c) => {
                upper = Some((k.clone(), c));
                if witness.is_some() {
                    break;
                }
                k /= rat(2);
            }
            Outcome::Infeasible(w) => {
                lower = k.clone();
                witness = Some(w);
                if upper.is_some() {
                    break;
                }
                k *= rat(2);
            }
        }
    }
    let (mut hi, mut cert) = upper.expect("bracket has a feasible end");

    let mut exact = None;
    let mut rho = witness.as_ref().map(|w| w.edge_ratio()).unwrap_or_else(Rational::zero);
    for _ in 0..REFINE_GUARD {
        if rho < lower || rho > hi {
            break;
        }
        match run(&rho) {
            Ok(Outcome::Feasible(c)) => {
                hi = rho.clone();
                cert = c;
                exact = Some(rho.clone());
                break;
            }
            Ok(Outcome::Infeasible(w)) => {
                let next = w.edge_ratio();
                lower = rho.clone();
                witness = Some(w);
                if next <= rho {
                    break;
                }
                rho = next;
            }
            Err(CertifyError::Inconclusive(_)) => break,
            Err(e) => return Err(e),
        }
    }
    if let Some(x) = &exact {
        lower = x.clone();
    }

    while exact.is_none() && &hi - &lower > &tol * &hi {
        let mid = (&lower + &hi) / rat(2);
        match run(&mid)? {
            Outcome::Feasible(c) => {
                hi = mid;
                cert = c;
            }
            Outcome::Infeasible(w) => {
                lower = mid;
                witness = Some(w);
            }
        }
    }

    Ok(KSearch {
        radius,
        estimate: (&lower + &hi) / rat(2),
        lower,
        upper: hi,
        exact,
        certificate: cert,
        witness,
        solves,
    })
}

/// `K_R` for the supply `kind` on `B_R` of `space` with capacities `K·g`.
pub fn min_feasible_k(space: &Space, radius: u32, kind: &SupplyKind, g: &GrowthFunction, rel_tol: f64) -> Result<KSearch> {
    let ball = space.ball(radius)?;
    min_feasible_k_in(&ball, kind, g, rel_tol, DEFAULT_SCALE)
}

pub fn min_feasible_k_in(ball: &BallIndex, kind: &SupplyKind, g: &GrowthFunction, rel_tol: f64, scale: u64) -> Result<KSearch> {
    g.validate(ball.radius())?;
    if let SupplyKind::Reciprocal(f) = kind {
        f.validate(ball.radius())?;
    }
    min_feasible_k_for(&kind.problem(ball, Rational::zero(), g.clone()).with_scale(scale), rel_tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedTrend,
    GrowingTrend,
    /// `K_R` is the same exact value at every radius from 2 on.
    Exact,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::BoundedTrend => "bounded-trend",
            Verdict::GrowingTrend => "growing-trend",
            Verdict::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceRow {
    #[serde(rename = "R")]
    pub r: u32,
    #[serde(rename = "K_R")]
    pub k: String,
    pub k_f64: f64,
    pub lower: String,
    pub upper: String,
    pub exact: bool,
    pub feasible: bool,
    pub solves: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub space: String,
    pub f: String,
    pub rows: Vec<EvidenceRow>,
    pub verdict: Verdict,
    /// Log-log slope of `K_R` over the upper half of the radii.
    pub slope: f64,
    /// Ratio of the last increment of `K_R` to the one before it.
    pub increment_ratio: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub rel_tol: f64,
    pub scale: u64,
    /// Worker threads for the radius sweep.
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { rel_tol: 1e-4, scale: DEFAULT_SCALE, jobs: 1 }
    }
}

/// Slope at or above which growth counts as unbounded.
pub const GROWING_SLOPE: f64 = 0.5;

/// `K_R` for `R = 1..=r_max` with `g = f` and the fundamental class.
pub fn vanishing_evidence(space: &Space, f: &GrowthFunction, r_max: u32, opts: &SearchOptions) -> Result<Evidence> {
    let searches = sweep(space, f, r_max, opts)?;
    let rows: Vec<EvidenceRow> = searches
        .iter()
        .map(|s| EvidenceRow {
            r: s.radius,
            k: format_rational(s.value()),
            k_f64: to_f64(s.value()),
            lower: format_rational(&s.lower),
            upper: format_rational(&s.upper),
            exact: s.exact.is_some(),
            feasible: true,
            solves: s.solves,
        })
        .collect();
    check_monotone(&searches)?;
    let values: Vec<f64> = searches.iter().map(|s| to_f64(s.value())).collect();
    let slope = trend_slope(&values);
    let increment_ratio = increment_ratio(&values);
    let settled = searches.len() >= 2
        && searches[1..].iter().all(|s| s.exact.is_some() && s.exact == searches[1].exact);
    let verdict = if settled {
        Verdict::Exact
    } else if slope >= GROWING_SLOPE {
        Verdict::GrowingTrend
    } else {
        Verdict::BoundedTrend
    };
    Ok(Evidence {
        space: space.descriptor().to_string(),
        f: f.to_string(),
        rows,
        verdict,
        slope,
        increment_ratio,
    })
}

/// Independent `K_R` searches for `R = 1..=r_max`, in radius order.
pub fn sweep(space: &Space, f: &GrowthFunction, r_max: u32, opts: &SearchOptions) -> Result<Vec<KSearch>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| CertifyError::Internal(e.to_string()))?;
    pool.install(|| {
        (1..=r_max)
            .into_par_iter()
            .map(|r| {
                let ball = space.ball(r)?;
                min_feasible_k_in(&ball, &SupplyKind::Ones, f, opts.rel_tol, opts.scale)
            })
            .collect()
    })
}

fn check_monotone(searches: &[KSearch]) -> Result<()> {
    for w in searches.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let broken = match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => y < x,
            _ => b.upper < a.lower,
        };
        if broken {
            return Err(CertifyError::NotMonotone {
                r: a.radius,
                next: b.radius,
                detail: format!("{} then {}", format_rational(a.value()), format_rational(b.value())),
            });
        }
    }
    Ok(())
}

/// Least-squares slope of `ln K_R` against `ln R` over `R ≥ ⌈n/2⌉`.
pub fn trend_slope(values: &[f64]) -> f64 {
    let n = values.len();
    let from = n.div_ceil(2).max(1);
    let pts: Vec<(f64, f64)> = (from..=n)
        .filter(|&r| values[r - 1] > 0.0)
        .map(|r| ((r as f64).ln(), values[r - 1].ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn increment_ratio(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let d1 = values[n - 2] - values[n - 3];
    let d2 = values[n - 1] - values[n - 2];
    (d1 > 0.0).then(|| d2 / d1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::ratio;

    #[test]
    fn line_closed_form() {
        let s = Space::parse("zd:1").unwrap();
        for r in 1..=6u32 {
            let k = min_feasible_k(&s, r, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4).unwrap();
            assert_eq!(k.exact, Some(ratio(2 * r as i64 - 1, 2)), "R = {r}");
        }
        let k = min_feasible_k(&s, 5, &SupplyKind::Ones, &GrowthFunction::linear(), 1e-4).unwrap();
        assert_eq!(k.value(), &ratio(3, 4));
    }

    #[test]
    fn tree_closed_form() {
        let s = Space::parse("free:2").unwrap();
        for r in 2..=4u32 {
            let p = 3i64.pow(r - 1);
            let k = min_feasible_k(&s, r, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4).unwrap();
            assert_eq!(k.value(), &ratio(2 * p - 1, 4 * p));
        }
    }

    #[test]
    fn single_point() {
        let s = Space::parse("zd:2").unwrap();
        let k = min_feasible_k(&s, 1, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4).unwrap();
        assert_eq!(k.value(), &ratio(1, 4));
        let k = min_feasible_k(&s, 0, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4).unwrap();
        assert_eq!(k.value(), &rat(0));
    }

    #[test]
    fn slopes() {
        let lin: Vec<f64> = (1..=8).map(|r| r as f64 - 0.5).collect();
        assert!(trend_slope(&lin) > 0.9);
        let flat: Vec<f64> = (1..=8).map(|r| 0.5 - 0.25 / r as f64).collect();
        assert!(trend_slope(&flat) < 0.2);
    }
}
