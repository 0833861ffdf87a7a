//! Closed forms and brute-force scanners written without the library's
//! ball, flow or profile code, compared against the library.

use std::collections::{BTreeMap, BTreeSet};

use coarsebound::certify::{min_feasible_k, solve, DivergenceProblem, SupplyKind};
use coarsebound::chains::{to_f64, GrowthFunction, Rational};
use coarsebound::profiles::{isodiametric_profile, ProfileMode};
use coarsebound::spectral::{dirichlet_gap, DirichletOperator, VertexWeight};
use coarsebound::Space;
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Max of `#A / Σ_{∂ᵉA} w(e)` over non-empty `A ⊆ interior`, by subset scan.
fn best_cut_ratio<P: Ord + Clone>(interior: &[P], nbrs: impl Fn(&P) -> Vec<P>, w: impl Fn(&P, &P) -> Rational) -> Rational {
    let n = interior.len();
    assert!(n <= 20);
    let mut best = q(0, 1);
    for mask in 1u32..(1 << n) {
        let set: BTreeSet<P> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| interior[i].clone()).collect();
        let mut cap = q(0, 1);
        for p in &set {
            for y in nbrs(p) {
                if !set.contains(&y) {
                    cap += w(p, &y);
                }
            }
        }
        let r = q(set.len() as i64, 1) / cap;
        if r > best {
            best = r;
        }
    }
    best
}

#[test]
fn line_min_cut_oracle() {
    for r in 1..=7i64 {
        let interior: Vec<i64> = (-(r - 1)..=(r - 1)).collect();
        let oracle = best_cut_ratio(&interior, |x| vec![x - 1, x + 1], |_, _| q(1, 1));
        assert_eq!(oracle, q(2 * r - 1, 2));
        let k = min_feasible_k(&Space::parse("zd:1").unwrap(), r as u32, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4)
            .unwrap();
        assert_eq!(k.value(), &oracle, "R = {r}");
    }
    // linear weights: w(x, y) = max(|x|, |y|) + 1
    let interior: Vec<i64> = (-4..=4).collect();
    let oracle = best_cut_ratio(&interior, |x| vec![x - 1, x + 1], |x, y| q(x.abs().max(y.abs()) + 1, 1));
    assert_eq!(oracle, q(3, 4));
    let k = min_feasible_k(&Space::parse("zd:1").unwrap(), 5, &SupplyKind::Ones, &GrowthFunction::linear(), 1e-4).unwrap();
    assert_eq!(k.value(), &oracle);
}

/// Reduced words in `a, A = a⁻¹, b, B = b⁻¹`.
fn tree_neighbors(w: &str) -> Vec<String> {
    let inv = |c: char| if c.is_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() };
    "aAbB"
        .chars()
        .map(|c| {
            let mut s = w.to_string();
            if s.ends_with(inv(c)) {
                s.pop();
            } else {
                s.push(c);
            }
            s
        })
        .collect()
}

fn tree_ball(r: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut shell = vec![String::new()];
    for _ in 0..r {
        let mut next = BTreeSet::new();
        for w in &shell {
            for v in tree_neighbors(w) {
                if v.len() > w.len() {
                    next.insert(v);
                }
            }
        }
        shell = next.into_iter().collect();
        all.extend(shell.iter().cloned());
    }
    all
}

#[test]
fn tree_shell_oracle() {
    let s = Space::parse("free:2").unwrap();
    for r in 2..=6u32 {
        let p = 3i64.pow(r - 1);
        // B_{R-1} holds 2·3^{R-1} - 1 points and 4·3^{R-1} edges leave it
        let inner = tree_ball(r as usize - 1);
        assert_eq!(inner.len() as i64, 2 * p - 1);
        let escaping: usize = inner
            .iter()
            .map(|w| tree_neighbors(w).iter().filter(|v| v.len() == r as usize).count())
            .sum();
        assert_eq!(escaping as i64, 4 * p);
        let k = min_feasible_k(&s, r, &SupplyKind::Ones, &GrowthFunction::constant(), 1e-4).unwrap();
        assert_eq!(k.value(), &q(2 * p - 1, 4 * p), "R = {r}");
    }
    // subset scan confirms the whole ball is the worst set for small R
    for r in 2..=3usize {
        let interior = tree_ball(r - 1);
        let oracle = best_cut_ratio(&interior, |w: &String| tree_neighbors(w), |_, _| q(1, 1));
        let p = 3i64.pow(r as u32 - 1);
        assert_eq!(oracle, q(2 * p - 1, 4 * p));
    }
}

/// Vertex boundary (inner and outer layers) of a finite set of grid points.
fn grid_profile(points: &[Vec<i64>], nbrs: impl Fn(&Vec<i64>) -> Vec<Vec<i64>>) -> Rational {
    let n = points.len();
    let mut best = q(0, 1);
    for mask in 1u32..(1 << n) {
        let set: BTreeSet<Vec<i64>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| points[i].clone()).collect();
        let mut bd = BTreeSet::new();
        for p in &set {
            for y in nbrs(p) {
                if !set.contains(&y) {
                    bd.insert(y);
                    bd.insert(p.clone());
                }
            }
        }
        let r = q(set.len() as i64, bd.len() as i64);
        if r > best {
            best = r;
        }
    }
    best
}

#[test]
fn isodiametric_subset_scanner() {
    let z1 = Space::parse("zd:1").unwrap();
    for r in 1..=7i64 {
        let pts: Vec<Vec<i64>> = (-r..=r).map(|x| vec![x]).collect();
        let oracle = grid_profile(&pts, |p| vec![vec![p[0] - 1], vec![p[0] + 1]]);
        let d = isodiametric_profile(&z1, r as u32, ProfileMode::Exact).unwrap();
        assert_eq!(d.value, oracle, "zd:1 r = {r}");
    }
    let z2 = Space::parse("zd:2").unwrap();
    let pts = vec![vec![0, 0], vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]];
    let oracle = grid_profile(&pts, |p| {
        vec![vec![p[0] + 1, p[1]], vec![p[0] - 1, p[1]], vec![p[0], p[1] + 1], vec![p[0], p[1] - 1]]
    });
    assert_eq!(oracle, q(5, 12));
    assert_eq!(isodiametric_profile(&z2, 1, ProfileMode::Exact).unwrap().value, oracle);
}

#[test]
fn profile_bounded_by_feasible_constant() {
    // feasible K at radius R gives D(r) ≤ deg·K·f(r+1) for r ≤ R - 1
    for (sp, f) in [("zd:2", "const"), ("zd:2", "linear"), ("heis", "linear"), ("free:2", "const")] {
        let s = Space::parse(sp).unwrap();
        let f = GrowthFunction::parse(f).unwrap();
        let big_r = 5;
        let k = min_feasible_k(&s, big_r, &SupplyKind::Ones, &f, 1e-4).unwrap();
        let deg = s.generator_count() as i64;
        for r in 1..big_r {
            let d = isodiametric_profile(&s, r, ProfileMode::Candidates).unwrap();
            let bound = q(deg, 1) * &k.upper * f.eval(r + 1);
            assert!(d.value <= bound, "{sp} r = {r}: {} > {}", to_f64(&d.value), to_f64(&bound));
        }
    }
}

fn dense_min_eigen(op: &DirichletOperator) -> f64 {
    let (m, rho) = op.dense();
    let n = m.len();
    let a = DMatrix::from_fn(n, n, |i, j| m[i][j] / (rho[i] * rho[j]).sqrt());
    SymmetricEigen::new(a).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[test]
fn path_spectrum_oracle() {
    let z1 = Space::parse("zd:1").unwrap();
    for r in 0..=10u32 {
        let gap = dirichlet_gap(&z1, r, &GrowthFunction::constant(), &VertexWeight::Unit, 0).unwrap();
        let oracle = 8.0 * (std::f64::consts::PI / (4.0 * r as f64 + 4.0)).sin().powi(2);
        assert!((gap.lambda_min - oracle).abs() < 1e-6, "R = {r}");
    }
    let g = dirichlet_gap(&z1, 3, &GrowthFunction::constant(), &VertexWeight::Unit, 0).unwrap();
    assert!((g.lambda_min - 0.3045).abs() < 1e-4);
}

#[test]
fn dense_eigensolve_oracle() {
    let lin = GrowthFunction::linear();
    let cases = [
        ("free:2", GrowthFunction::constant(), VertexWeight::Unit),
        ("zd:2", lin.clone(), VertexWeight::Unit),
        ("heis", GrowthFunction::constant(), VertexWeight::Reciprocal(lin.clone())),
        ("lamp:1", GrowthFunction::constant(), VertexWeight::Unit),
        ("bs:1:2", lin.clone(), VertexWeight::Reciprocal(lin.clone())),
    ];
    for (sp, w, rho) in cases {
        let s = Space::parse(sp).unwrap();
        for r in 1..=4u32 {
            let gap = dirichlet_gap(&s, r, &w, &rho, 7).unwrap();
            let ball = s.ball(r + 1).unwrap();
            let op = DirichletOperator::new(&ball, r, &w, &rho).unwrap();
            let dense = dense_min_eigen(&op);
            assert!((gap.lambda_min - dense).abs() < 1e-7 * dense.max(1.0), "{sp} R = {r}");
            if sp == "free:2" {
                assert!(gap.lambda_min >= 2.0 * (4.0 - 2.0 * 3f64.sqrt()));
            }
        }
    }
}

#[test]
fn single_interior_point_gap() {
    for (sp, deg) in [("zd:2", 4.0), ("free:2", 4.0), ("lamp:1", 3.0), ("zd:3", 6.0)] {
        let s = Space::parse(sp).unwrap();
        let lin = GrowthFunction::linear();
        let g = dirichlet_gap(&s, 0, &lin, &VertexWeight::Unit, 0).unwrap();
        assert!((g.lambda_min - 2.0 * deg * 2.0).abs() < 1e-9, "{sp}");
    }
}

#[test]
fn amenable_growth_beats_every_constant() {
    // c ≡ 1 on zd:2 with unit capacities: a fixed K fails once R is large
    let s = Space::parse("zd:2").unwrap();
    for k in [1i64, 2] {
        let defeated = (2..=12u32).any(|r| {
            let ball = s.ball(r).unwrap();
            !solve(&DivergenceProblem::fundamental(&ball, q(k, 1), GrowthFunction::constant())).unwrap().is_feasible()
        });
        assert!(defeated, "K = {k}");
    }
    // and on the tree K = 1/2 always suffices
    let t = Space::parse("free:2").unwrap();
    for r in 1..=6u32 {
        let ball = t.ball(r).unwrap();
        assert!(solve(&DivergenceProblem::fundamental(&ball, q(1, 2), GrowthFunction::constant())).unwrap().is_feasible());
    }
}

#[test]
fn ball_counts_match_word_models() {
    let s = Space::parse("free:2").unwrap();
    for r in 0..=5 {
        assert_eq!(s.ball(r).unwrap().len(), tree_ball(r as usize).len());
    }
    // lamp:1 by brute force over (cursor, lamp set) states
    let l = Space::parse("lamp:1").unwrap();
    let mut dist: BTreeMap<(i64, BTreeSet<i64>), u32> = BTreeMap::new();
    let start = (0i64, BTreeSet::new());
    dist.insert(start.clone(), 0);
    let mut frontier = vec![start];
    for d in 1..=6u32 {
        let mut next = Vec::new();
        for (pos, lamps) in &frontier {
            let mut flipped = lamps.clone();
            if !flipped.remove(pos) {
                flipped.insert(*pos);
            }
            for st in [(pos - 1, lamps.clone()), (pos + 1, lamps.clone()), (*pos, flipped)] {
                if !dist.contains_key(&st) {
                    dist.insert(st.clone(), d);
                    next.push(st);
                }
            }
        }
        frontier = next;
        let expected = dist.values().filter(|&&x| x <= d).count();
        assert_eq!(l.ball(d).unwrap().len(), expected, "lamp:1 R = {d}");
    }
}
