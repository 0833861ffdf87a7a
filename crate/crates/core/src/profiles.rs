//! Vertex and edge boundaries, isoperimetric ratios, the isodiametric
//! profile `D(r)` and an exact check of the co-area inequality chain.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{format_rational, rat, ratio, to_f64, GrowthFunction, Rational};
use crate::spaces::{BallIndex, PointCode, Space, SpaceError};

/// Largest `#B(e, r)` accepted by the exhaustive subset scan.
pub const EXACT_SCAN_CAP: usize = 22;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("the 1-neighborhood of `{0}` is not contained in the ball")]
    EscapesBall(String),
    #[error("exact scan needs #B(e,r) <= {cap}, got {points}")]
    ScanCap { points: usize, cap: usize },
}

type Result<T> = std::result::Result<T, ProfileError>;

fn membership(ball: &BallIndex, a: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; ball.len()];
    for &i in a {
        if !ball.is_interior(i) {
            return Err(ProfileError::EscapesBall(format!("{:?}", ball.point(i))));
        }
        inside[i] = true;
    }
    Ok(inside)
}

/// `∂A`: points of `A` with a neighbour outside `A`, together with points
/// outside `A` with a neighbour in `A`. Sorted ball indices.
pub fn vertex_boundary(ball: &BallIndex, a: &[usize]) -> Result<Vec<usize>> {
    let inside = membership(ball, a)?;
    let mut out = BTreeSet::new();
    for &x in a {
        for &y in ball.neighbors(x) {
            if !inside[y] {
                out.insert(x);
                out.insert(y);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// `∂ᵉA`: unordered crossing edges as `(inside, outside)` pairs, sorted.
pub fn edge_boundary(ball: &BallIndex, a: &[usize]) -> Result<Vec<(usize, usize)>> {
    let inside = membership(ball, a)?;
    let mut out = Vec::new();
    for &x in a {
        for &y in ball.neighbors(x) {
            if !inside[y] {
                out.push((x, y));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `#A / Σ_{x ∈ ∂A} f(|x|)`, zero for the empty set.
pub fn iso_ratio(ball: &BallIndex, a: &[usize], f: &GrowthFunction) -> Result<Rational> {
    let b = vertex_boundary(ball, a)?;
    let denom: Rational = b.iter().map(|&x| f.eval(ball.length(x))).sum();
    if a.is_empty() || denom.is_zero() {
        return Ok(Rational::zero());
    }
    Ok(rat(a.len() as i64) / denom)
}

/// Parses a point list and resolves it in the ball; duplicates are merged.
pub fn resolve_points(ball: &BallIndex, space: &Space, pts: &[PointCode]) -> Result<Vec<usize>> {
    let mut idx = BTreeSet::new();
    for p in pts {
        idx.insert(ball.index_of(p).ok_or_else(|| SpaceError::NotInBall(space.display(p)))?);
    }
    Ok(idx.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileMode {
    /// Exhaustive scan of all non-empty subsets of `B(e, r)`.
    Exact,
    /// Best of balls, coordinate boxes and greedy accretion; a lower bound.
    Candidates,
}

#[derive(Clone, Debug)]
pub struct ProfilePoint {
    pub r: u32,
    pub value: Rational,
    pub witness: Vec<PointCode>,
    pub boundary_size: usize,
    pub exact: bool,
    /// Which candidate family produced the witness.
    pub family: String,
}

#[derive(Serialize)]
pub struct ProfileSummary {
    pub space: String,
    pub r: u32,
    pub value: String,
    pub value_f64: f64,
    pub set_size: usize,
    pub boundary_size: usize,
    pub exact: bool,
    pub family: String,
    pub witness: Vec<String>,
}

impl ProfilePoint {
    pub fn summary(&self, space: &Space) -> ProfileSummary {
        ProfileSummary {
            space: space.descriptor().to_string(),
            r: self.r,
            value: format_rational(&self.value),
            value_f64: to_f64(&self.value),
            set_size: self.witness.len(),
            boundary_size: self.boundary_size,
            exact: self.exact,
            family: self.family.clone(),
            witness: self.witness.iter().map(|p| space.display(p)).collect(),
        }
    }
}

/// `(#F, #∂F)` comparison key: ratio first, then larger `#F`.
fn better(a: (usize, usize), b: (usize, usize)) -> std::cmp::Ordering {
    ((a.0 * b.1) as u64).cmp(&((b.0 * a.1) as u64)).then(a.0.cmp(&b.0))
}

/// `D(r) = max #F / #∂F` over `F ⊆ B(e, r)`, centred at the basepoint.
pub fn isodiametric_profile(space: &Space, r: u32, mode: ProfileMode) -> Result<ProfilePoint> {
    let ball = space.ball(r + 1)?;
    let members: Vec<usize> = (0..ball.len()).filter(|&i| ball.length(i) <= r).collect();
    let (set, bsize, family) = match mode {
        ProfileMode::Exact => {
            if members.len() > EXACT_SCAN_CAP {
                return Err(ProfileError::ScanCap { points: members.len(), cap: EXACT_SCAN_CAP });
            }
            let (set, b) = exact_scan(&ball, &members);
            (set, b, "exhaustive".to_string())
        }
        ProfileMode::Candidates => candidate_scan(space, &ball, &members)?,
    };
    let value = rat(set.len() as i64) / rat(bsize as i64);
    Ok(ProfilePoint {
        r,
        value,
        witness: set.iter().map(|&i| ball.point(i).clone()).collect(),
        boundary_size: bsize,
        exact: mode == ProfileMode::Exact,
        family,
    })
}

fn exact_scan(ball: &BallIndex, members: &[usize]) -> (Vec<usize>, usize) {
    let m = members.len();
    // bit j of nbr[y] is set iff members[j] is adjacent to y
    let mut nbr = vec![0u32; ball.len()];
    for (j, &x) in members.iter().enumerate() {
        for &y in ball.neighbors(x) {
            nbr[y] |= 1 << j;
        }
    }
    let member_bit: Vec<Option<u32>> = {
        let mut v = vec![None; ball.len()];
        for (j, &x) in members.iter().enumerate() {
            v[x] = Some(1u32 << j);
        }
        v
    };
    // members with a neighbour outside B(e, r) are always inner boundary when in F
    let exposed: u32 = members
        .iter()
        .enumerate()
        .filter(|(_, &x)| ball.neighbors(x).iter().any(|&y| member_bit[y].is_none()))
        .map(|(j, _)| 1u32 << j)
        .sum();
    let count = |f: u32| -> usize {
        let mut b = 0;
        for y in 0..ball.len() {
            let touches = nbr[y] & f != 0;
            match member_bit[y] {
                Some(bit) if f & bit != 0 => {
                    if exposed & bit != 0 || nbr[y] & !f != 0 {
                        b += 1;
                    }
                }
                _ => {
                    if touches {
                        b += 1;
                    }
                }
            }
        }
        b
    };
    let best = (1u32..(1u32 << m))
        .into_par_iter()
        .map(|f| (f.count_ones() as usize, count(f), f))
        .reduce(
            || (0, 1, 0),
            |a, b| match better((a.0, a.1), (b.0, b.1)) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                // smaller mask wins ties
                std::cmp::Ordering::Equal => {
                    if a.2 <= b.2 {
                        a
                    } else {
                        b
                    }
                }
            },
        );
    let set = (0..m).filter(|j| best.2 & (1 << j) != 0).map(|j| members[j]).collect();
    (set, best.1)
}

/// Boundary size of a membership vector restricted to ball indices.
fn boundary_size(ball: &BallIndex, inside: &[bool], set: &[usize]) -> usize {
    let mut seen = BTreeSet::new();
    for &x in set {
        for &y in ball.neighbors(x) {
            if !inside[y] {
                seen.insert(x);
                seen.insert(y);
            }
        }
    }
    seen.len()
}

fn candidate_scan(space: &Space, ball: &BallIndex, members: &[usize]) -> Result<(Vec<usize>, usize, String)> {
    let mut best: Option<(Vec<usize>, usize, String)> = None;
    let consider = |set: Vec<usize>, family: &str, best: &mut Option<(Vec<usize>, usize, String)>| {
        if set.is_empty() {
            return;
        }
        let mut inside = vec![false; ball.len()];
        for &i in &set {
            inside[i] = true;
        }
        let b = boundary_size(ball, &inside, &set);
        let replace = match best {
            None => true,
            Some((s, bb, _)) => better((set.len(), b), (s.len(), *bb)) == std::cmp::Ordering::Greater,
        };
        if replace {
            *best = Some((set, b, family.to_string()));
        }
    };

    let r = members.iter().map(|&i| ball.length(i)).max().unwrap_or(0);
    for k in 0..=r {
        consider(members.iter().copied().filter(|&i| ball.length(i) <= k).collect(), "ball", &mut best);
    }

    let extents: Vec<Option<Vec<u64>>> = members
        .iter()
        .map(|&i| space.extents(ball.point(i)))
        .collect::<std::result::Result<_, _>>()?;
    if let Some(Some(first)) = extents.first() {
        let dims = first.len();
        let maxes: Vec<u64> = (0..dims)
            .map(|d| extents.iter().flatten().map(|e| e[d]).max().unwrap_or(0))
            .collect();
        let combos: u64 = maxes.iter().map(|m| m + 1).product();
        let thresholds: Vec<Vec<u64>> = if combos <= 4096 {
            let mut all = vec![vec![]];
            for &m in &maxes {
                all = all
                    .into_iter()
                    .flat_map(|v: Vec<u64>| {
                        (0..=m).map(move |t| {
                            let mut w = v.clone();
                            w.push(t);
                            w
                        })
                    })
                    .collect();
            }
            all
        } else {
            let top = maxes.iter().copied().max().unwrap_or(0);
            (0..=top).map(|t| maxes.iter().map(|&m| t.min(m)).collect()).collect()
        };
        for t in thresholds {
            let set: Vec<usize> = members
                .iter()
                .zip(&extents)
                .filter(|(_, e)| e.as_ref().is_some_and(|e| e.iter().zip(&t).all(|(a, b)| a <= b)))
                .map(|(&i, _)| i)
                .collect();
            consider(set, "box", &mut best);
        }
    }

    for set in greedy_accretion(ball, members) {
        consider(set, "greedy", &mut best);
    }
    Ok(best.expect("basepoint alone is a candidate"))
}

/// Grows `F` from the basepoint, each time adding the adjacent member that
/// gives the largest ratio. Returns the best set seen.
fn greedy_accretion(ball: &BallIndex, members: &[usize]) -> Vec<Vec<usize>> {
    let is_member: Vec<bool> = {
        let mut v = vec![false; ball.len()];
        for &i in members {
            v[i] = true;
        }
        v
    };
    let mut inside = vec![false; ball.len()];
    let mut set = vec![members[0]];
    inside[members[0]] = true;
    let mut bsize = boundary_size(ball, &inside, &set);
    let mut best = (set.clone(), bsize);
    let on_boundary = |inside: &[bool], q: usize| -> bool {
        let nb = ball.neighbors(q);
        if inside[q] {
            !ball.is_interior(q) || nb.iter().any(|&y| !inside[y])
        } else {
            nb.iter().any(|&y| inside[y])
        }
    };
    loop {
        let mut frontier: BTreeSet<usize> = BTreeSet::new();
        for &x in &set {
            for &y in ball.neighbors(x) {
                if is_member[y] && !inside[y] {
                    frontier.insert(y);
                }
            }
        }
        if frontier.is_empty() {
            break;
        }
        let mut pick: Option<(usize, usize)> = None;
        for &p in &frontier {
            let mut local: Vec<usize> = ball.neighbors(p).to_vec();
            local.push(p);
            local.sort();
            local.dedup();
            let before = local.iter().filter(|&&q| on_boundary(&inside, q)).count();
            inside[p] = true;
            let after = local.iter().filter(|&&q| on_boundary(&inside, q)).count();
            inside[p] = false;
            let nb = bsize + after - before;
            let better_pick = match pick {
                None => true,
                Some((_, pb)) => better((set.len() + 1, nb), (set.len() + 1, pb)) == std::cmp::Ordering::Greater,
            };
            if better_pick {
                pick = Some((p, nb));
            }
        }
        let (p, nb) = pick.unwrap();
        inside[p] = true;
        set.push(p);
        bsize = nb;
        if better((set.len(), bsize), (best.0.len(), best.1)) == std::cmp::Ordering::Greater {
            best = (set.clone(), bsize);
        }
    }
    let mut s = best.0;
    s.sort();
    vec![s]
}

#[derive(Clone, Debug, Serialize)]
pub struct CoareaReport {
    pub space: String,
    pub f: String,
    pub radius: u32,
    pub trials: usize,
    pub violations: usize,
    /// `sup Σ|η| / RHS(η)` over trials.
    pub empirical_constant: String,
    pub empirical_constant_f64: f64,
    /// `sup #A / Σ_{∂A} f(|x|)` over the tested level sets.
    pub set_constant: String,
    pub set_constant_f64: f64,
    pub level_sets_checked: usize,
}

/// `Σ_x Σ_{y ~ x} |η(x) - η(y)| f(|(x, y)|)` over ordered pairs.
fn functional_rhs(ball: &BallIndex, eta: &[Rational], f: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (a, b) in ball.edges() {
        let d = (&eta[a] - &eta[b]).abs();
        if !d.is_zero() {
            s += d * &f[ball.length(a).max(ball.length(b)) as usize];
        }
    }
    s * rat(2)
}

/// Random level functions `η` on `B_R` with at most 8 values `i/M`; checks
/// exactly that
/// * `RHS(|η|) ≤ RHS(η)`,
/// * the co-area identities `Σ|η| = Σ_i Δt_i #A_i` and
///   `RHS(|η|) = Σ_i Δt_i RHS(1_{A_i})` for the nested level sets,
/// * `RHS(1_A) = 2 Σ_{∂ᵉA} f(|e|) ≥ Σ_{∂A} f(|x|)` for each level set,
/// * `Σ|η| / RHS(η) ≤ max_i #A_i / RHS(1_{A_i}) ≤ max_i #A_i / Σ_{∂A_i} f`.
pub fn coarea_validate(space: &Space, f: &GrowthFunction, radius: u32, trials: usize, seed: u64) -> Result<CoareaReport> {
    let ball = space.ball(radius + 1)?;
    let fv: Vec<Rational> = (0..=radius + 1).map(|t| f.eval(t)).collect();
    let domain: Vec<usize> = (0..ball.len()).filter(|&i| ball.length(i) <= radius).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut emp = Rational::zero();
    let mut set_const = Rational::zero();
    let mut level_sets = 0;
    for _ in 0..trials {
        let m: i64 = rng.gen_range(1..=8);
        let nlevels = rng.gen_range(1..=8usize);
        let mut values: Vec<Rational> = Vec::new();
        while values.len() < nlevels {
            let i = rng.gen_range(-2 * m..=2 * m);
            let v = ratio(i, m);
            if !values.contains(&v) {
                values.push(v);
            }
            if values.len() as i64 > 4 * m {
                break;
            }
        }
        let density: f64 = rng.gen_range(0.1..0.9);
        let mut eta = vec![Rational::zero(); ball.len()];
        for &x in &domain {
            if rng.gen_bool(density) {
                eta[x] = values[rng.gen_range(0..values.len())].clone();
            }
        }
        let abs: Vec<Rational> = eta.iter().map(|v| v.abs()).collect();
        let lhs: Rational = abs.iter().sum();
        let rhs = functional_rhs(&ball, &eta, &fv);
        let rhs_abs = functional_rhs(&ball, &abs, &fv);
        if rhs_abs > rhs {
            violations += 1;
        }
        let mut levels: Vec<Rational> = abs.iter().filter(|v| v.is_positive()).cloned().collect();
        levels.sort();
        levels.dedup();
        let mut prev = Rational::zero();
        let mut lhs_sum = Rational::zero();
        let mut rhs_sum = Rational::zero();
        let mut mediant = Rational::zero();
        let mut set_form = Rational::zero();
        for t in &levels {
            let a: Vec<usize> = domain.iter().copied().filter(|&x| &abs[x] >= t).collect();
            let ind: Vec<Rational> = (0..ball.len())
                .map(|x| if &abs[x] >= t { Rational::one() } else { Rational::zero() })
                .collect();
            let rhs_a = functional_rhs(&ball, &ind, &fv);
            let edge_form: Rational = edge_boundary(&ball, &a)?
                .iter()
                .map(|&(x, y)| fv[ball.length(x).max(ball.length(y)) as usize].clone())
                .sum::<Rational>()
                * rat(2);
            let vertex_form: Rational = vertex_boundary(&ball, &a)?
                .iter()
                .map(|&x| fv[ball.length(x) as usize].clone())
                .sum();
            if rhs_a != edge_form || rhs_a < vertex_form {
                violations += 1;
            }
            let dt = t - &prev;
            lhs_sum += &dt * rat(a.len() as i64);
            rhs_sum += &dt * &rhs_a;
            let na = rat(a.len() as i64);
            let fn_form = &na / &rhs_a;
            let sf = &na / &vertex_form;
            if fn_form > sf {
                violations += 1;
            }
            mediant = mediant.max(fn_form);
            set_form = set_form.max(sf);
            prev = t.clone();
            level_sets += 1;
        }
        if lhs_sum != lhs || rhs_sum != rhs_abs {
            violations += 1;
        }
        if !lhs.is_zero() {
            let ratio_eta = &lhs / &rhs;
            if ratio_eta > mediant || mediant > set_form {
                violations += 1;
            }
            emp = emp.max(ratio_eta);
            set_const = set_const.max(set_form);
        } else if !rhs.is_zero() {
            violations += 1;
        }
    }
    Ok(CoareaReport {
        space: space.descriptor().to_string(),
        f: f.to_string(),
        radius,
        trials,
        violations,
        empirical_constant: format_rational(&emp),
        empirical_constant_f64: to_f64(&emp),
        set_constant: format_rational(&set_const),
        set_constant_f64: to_f64(&set_const),
        level_sets_checked: level_sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(ball: &BallIndex, s: &Space, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| ball.index_of(&s.parse_point(n).unwrap()).unwrap()).collect()
    }

    #[test]
    fn boundary_examples() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(4).unwrap();
        assert_eq!(vertex_boundary(&ball, &idx(&ball, &z2, &["0,0"])).unwrap().len(), 5);
        assert!(vertex_boundary(&ball, &[]).unwrap().is_empty());
        assert_eq!(vertex_boundary(&ball, &idx(&ball, &z2, &["0,0", "1,0"])).unwrap().len(), 8);
        assert_eq!(edge_boundary(&ball, &idx(&ball, &z2, &["0,0"])).unwrap().len(), 4);

        let z1 = Space::parse("zd:1").unwrap();
        let b1 = z1.ball(3).unwrap();
        assert_eq!(edge_boundary(&b1, &idx(&b1, &z1, &["0", "1", "-1"])).unwrap().len(), 2);

        let f2 = Space::parse("free:2").unwrap();
        let bf = f2.ball(2).unwrap();
        assert_eq!(edge_boundary(&bf, &idx(&bf, &f2, &["1", "a", "A", "b", "B"])).unwrap().len(), 12);

        let frontier = idx(&ball, &z2, &["4,0"]);
        assert!(matches!(vertex_boundary(&ball, &frontier), Err(ProfileError::EscapesBall(_))));
    }

    #[test]
    fn ratio_examples() {
        let z1 = Space::parse("zd:1").unwrap();
        for big_r in 2..8u32 {
            let ball = z1.ball(big_r + 1).unwrap();
            let a: Vec<usize> = (0..ball.len()).filter(|&i| ball.length(i) < big_r).collect();
            let r = iso_ratio(&ball, &a, &GrowthFunction::linear()).unwrap();
            // boundary {±(R-1), ±R} with f = t+1
            let expected = rat(2 * big_r as i64 - 1) / rat(2 * (big_r as i64) + 2 * (big_r as i64 + 1));
            assert_eq!(r, expected);
            assert_eq!(expected, ratio(2 * big_r as i64 - 1, 4 * big_r as i64 + 2));
        }
        let ball = z1.ball(3).unwrap();
        let a = vec![0, 1, 2];
        assert_eq!(iso_ratio(&ball, &a, &GrowthFunction::constant()).unwrap(), ratio(3, 4));
    }

    #[test]
    fn exact_profiles() {
        let z1 = Space::parse("zd:1").unwrap();
        let p = isodiametric_profile(&z1, 2, ProfileMode::Exact).unwrap();
        assert_eq!(p.value, ratio(5, 4));
        assert_eq!(p.witness.len(), 5);
        let z2 = Space::parse("zd:2").unwrap();
        let p = isodiametric_profile(&z2, 1, ProfileMode::Exact).unwrap();
        assert_eq!(p.value, ratio(5, 12));
        let p0 = isodiametric_profile(&z2, 0, ProfileMode::Exact).unwrap();
        assert_eq!(p0.value, ratio(1, 5));
        assert!(matches!(
            isodiametric_profile(&z2, 3, ProfileMode::Exact),
            Err(ProfileError::ScanCap { points: 25, .. })
        ));
        let c = isodiametric_profile(&z2, 1, ProfileMode::Candidates).unwrap();
        assert!(c.value <= ratio(5, 12));
        assert!(!c.exact);
    }

    #[test]
    fn coarea_small() {
        let z2 = Space::parse("zd:2").unwrap();
        let rep = coarea_validate(&z2, &GrowthFunction::linear(), 3, 20, 7).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.empirical_constant_f64 <= rep.set_constant_f64);
    }
}
