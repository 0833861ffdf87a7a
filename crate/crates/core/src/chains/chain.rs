use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{ChainError, GrowthFunction, Rational};
use crate::spaces::{BallIndex, PointCode};

/// An oriented simplex stored with vertices in ascending encoding order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<PointCode>);

impl Simplex {
    /// Sorts `vertices`, returning the simplex and the permutation sign, or
    /// `None` for a degenerate simplex (repeated vertex).
    pub fn oriented(mut vertices: Vec<PointCode>) -> Option<(Simplex, bool)> {
        let mut odd = false;
        // insertion sort; dimension is at most 2
        for i in 1..vertices.len() {
            let mut j = i;
            while j > 0 && vertices[j - 1] > vertices[j] {
                vertices.swap(j - 1, j);
                odd = !odd;
                j -= 1;
            }
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((Simplex(vertices), odd))
    }

    pub fn vertices(&self) -> &[PointCode] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }
}

/// A finitely supported chain of dimension 0, 1 or 2 with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    coeffs: BTreeMap<Simplex, Rational>,
}

/// Result of [`Chain::pushforward`].
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub chain: Chain,
    /// Number of simplices whose image was degenerate and was dropped.
    pub degenerate: usize,
}

impl Chain {
    pub fn new(dim: usize) -> Result<Chain, ChainError> {
        if dim > 2 {
            return Err(ChainError::BadDimension(dim));
        }
        Ok(Chain { dim, coeffs: BTreeMap::new() })
    }

    pub(crate) fn zero(dim: usize) -> Chain {
        Chain { dim, coeffs: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &Rational)> {
        self.coeffs.iter()
    }

    fn add_sorted(&mut self, s: Simplex, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(s) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `c` times the oriented simplex `[v0, ..., vn]`. Returns `false` if
    /// the simplex is degenerate (and nothing was added).
    pub fn add(&mut self, vertices: Vec<PointCode>, c: Rational) -> Result<bool, ChainError> {
        if vertices.len() != self.dim + 1 {
            return Err(ChainError::WrongArity { expected: self.dim + 1, got: vertices.len() });
        }
        Ok(match Simplex::oriented(vertices) {
            Some((s, odd)) => {
                self.add_sorted(s, if odd { -c } else { c });
                true
            }
            None => false,
        })
    }

    /// Coefficient of the oriented simplex `[v0, ..., vn]`, so that
    /// `coefficient([x, y]) = -coefficient([y, x])`.
    pub fn coefficient(&self, vertices: &[PointCode]) -> Rational {
        match Simplex::oriented(vertices.to_vec()) {
            Some((s, odd)) => {
                let c = self.coeffs.get(&s).cloned().unwrap_or_else(Rational::zero);
                if odd {
                    -c
                } else {
                    c
                }
            }
            None => Rational::zero(),
        }
    }

    /// Value of a 0-chain at `p`.
    pub fn value(&self, p: &PointCode) -> Rational {
        self.coefficient(std::slice::from_ref(p))
    }

    pub fn scaled(&self, lambda: &Rational) -> Chain {
        let mut out = Chain::zero(self.dim);
        if lambda.is_zero() {
            return out;
        }
        out.coeffs = self.coeffs.iter().map(|(s, c)| (s.clone(), c * lambda)).collect();
        out
    }

    pub fn add_chain(&mut self, other: &Chain) -> Result<(), ChainError> {
        if other.dim != self.dim {
            return Err(ChainError::DimensionMismatch(self.dim, other.dim));
        }
        for (s, c) in &other.coeffs {
            self.add_sorted(s.clone(), c.clone());
        }
        Ok(())
    }

    pub fn sub_chain(&mut self, other: &Chain) -> Result<(), ChainError> {
        self.add_chain(&other.scaled(&-Rational::from_integer(1.into())))
    }

    /// Largest absolute coefficient, zero for the empty chain.
    pub fn max_abs(&self) -> Rational {
        self.coeffs.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    fn check_in_ball(&self, ball: &BallIndex) -> Result<(), ChainError> {
        for s in self.coeffs.keys() {
            for v in s.vertices() {
                if !ball.contains(v) {
                    return Err(ChainError::OutsideBall(format!("{v:?}")));
                }
            }
        }
        Ok(())
    }

    /// `∂[x0..xn] = Σ (-1)^i [x0..x̂i..xn]`, extended linearly.
    pub fn boundary(&self, ball: &BallIndex) -> Result<Chain, ChainError> {
        if self.dim == 0 {
            return Err(ChainError::BadDimension(0));
        }
        self.check_in_ball(ball)?;
        let mut out = Chain::zero(self.dim - 1);
        for (s, c) in &self.coeffs {
            for i in 0..=self.dim {
                let mut face = s.0.clone();
                face.remove(i);
                let term = if i % 2 == 0 { c.clone() } else { -c.clone() };
                out.add_sorted(Simplex(face), term);
            }
        }
        Ok(out)
    }

    /// Maximal pairwise graph distance (inside the ball) between vertices
    /// of a stored simplex.
    pub fn propagation(&self, ball: &BallIndex) -> Result<u32, ChainError> {
        self.check_in_ball(ball)?;
        let mut best = 0;
        for s in self.coeffs.keys() {
            let idx: Vec<usize> = s.0.iter().map(|v| ball.index_of(v).unwrap()).collect();
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    let d = if ball.are_adjacent(idx[a], idx[b]) {
                        1
                    } else {
                        ball.distance(idx[a], idx[b]).unwrap_or(u32::MAX)
                    };
                    best = best.max(d);
                }
            }
        }
        Ok(best)
    }

    /// `K_c = max |c_s| / f(|s|)`, with `|s|` the largest vertex length.
    pub fn growth_constant(&self, f: &GrowthFunction, ball: &BallIndex) -> Result<Rational, ChainError> {
        let mut best = Rational::zero();
        for (s, c) in &self.coeffs {
            let len = simplex_length(ball, s.vertices())?;
            let r = c.abs() / f.eval(len);
            if r > best {
                best = r;
            }
        }
        Ok(best)
    }

    /// `F_*` along a point map; images must lie in `target`.
    pub fn pushforward<F>(&self, map: F, target: &BallIndex) -> Result<Pushforward, ChainError>
    where
        F: Fn(&PointCode) -> Option<PointCode>,
    {
        let mut out = Chain::zero(self.dim);
        let mut degenerate = 0;
        for (s, c) in &self.coeffs {
            let mut image = Vec::with_capacity(s.0.len());
            for v in &s.0 {
                let w = map(v).ok_or_else(|| ChainError::Unmapped(format!("{v:?}")))?;
                if !target.contains(&w) {
                    return Err(ChainError::OutsideBall(format!("{w:?}")));
                }
                image.push(w);
            }
            if !out.add(image, c.clone())? {
                degenerate += 1;
            }
        }
        Ok(Pushforward { chain: out, degenerate })
    }
}

/// `|x̄| = max_i |x_i|`.
pub fn simplex_length(ball: &BallIndex, vertices: &[PointCode]) -> Result<u32, ChainError> {
    let mut len = 0;
    for v in vertices {
        len = len.max(ball.length_of(v).ok_or_else(|| ChainError::OutsideBall(format!("{v:?}")))?);
    }
    Ok(len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{rat, ratio};
    use crate::spaces::Space;

    fn pts(s: &Space, names: &[&str]) -> Vec<PointCode> {
        names.iter().map(|n| s.parse_point(n).unwrap()).collect()
    }

    #[test]
    fn orientation_and_boundary() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(3).unwrap();
        let e = pts(&z2, &["0,0", "1,0"]);
        let mut c = Chain::new(1).unwrap();
        c.add(e.clone(), rat(1)).unwrap();
        assert_eq!(c.coefficient(&[e[1].clone(), e[0].clone()]), rat(-1));
        let b = c.boundary(&ball).unwrap();
        assert_eq!(b.value(&e[1]), rat(1));
        assert_eq!(b.value(&e[0]), rat(-1));
        // opposite orientation cancels
        c.add(vec![e[1].clone(), e[0].clone()], rat(1)).unwrap();
        assert!(c.is_empty());
        assert!(!c.add(vec![e[0].clone(), e[0].clone()], rat(1)).unwrap());
    }

    #[test]
    fn boundary_of_boundary() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(3).unwrap();
        let mut t = Chain::new(2).unwrap();
        t.add(pts(&z2, &["0,0", "1,0", "1,1"]), ratio(3, 7)).unwrap();
        t.add(pts(&z2, &["1,1", "0,0", "0,1"]), rat(-2)).unwrap();
        assert!(t.boundary(&ball).unwrap().boundary(&ball).unwrap().is_empty());
        assert_eq!(simplex_length(&ball, &pts(&z2, &["0,0", "1,0", "1,1"])).unwrap(), 2);
    }

    #[test]
    fn propagation_and_growth() {
        let z2 = Space::parse("zd:2").unwrap();
        let ball = z2.ball(5).unwrap();
        let mut c = Chain::new(1).unwrap();
        assert_eq!(c.propagation(&ball).unwrap(), 0);
        assert_eq!(c.growth_constant(&GrowthFunction::linear(), &ball).unwrap(), rat(0));
        c.add(pts(&z2, &["0,0", "2,0"]), rat(3)).unwrap();
        assert_eq!(c.propagation(&ball).unwrap(), 2);
        c.add(pts(&z2, &["3,0", "4,0"]), rat(-6)).unwrap();
        assert_eq!(c.growth_constant(&GrowthFunction::constant(), &ball).unwrap(), rat(6));
        assert_eq!(c.growth_constant(&GrowthFunction::linear(), &ball).unwrap(), ratio(6, 5));
        let far = pts(&z2, &["6,0", "5,0"]);
        let mut d = Chain::new(1).unwrap();
        d.add(far, rat(1)).unwrap();
        assert!(matches!(d.boundary(&ball), Err(ChainError::OutsideBall(_))));
    }

    #[test]
    fn pushforward_collapse_and_embed() {
        let z1 = Space::parse("zd:1").unwrap();
        let z2 = Space::parse("zd:2").unwrap();
        let b1 = z1.ball(3).unwrap();
        let b2 = z2.ball(3).unwrap();
        let mut c = Chain::new(1).unwrap();
        for n in -3..3i64 {
            c.add(pts(&z1, &[&n.to_string(), &(n + 1).to_string()]), rat(-n)).unwrap();
        }
        let id = c.pushforward(|p| Some(p.clone()), &b1).unwrap();
        assert_eq!(id.chain, c);
        assert_eq!(id.degenerate, 0);

        let embed = |p: &PointCode| {
            let n = z1.format_point(p).ok()?;
            z2.parse_point(&format!("{n},0")).ok()
        };
        let e = c.pushforward(embed, &b2).unwrap();
        assert_eq!(e.chain.len(), c.len());
        assert_eq!(e.chain.coefficient(&pts(&z2, &["-2,0", "-1,0"])), rat(2));

        let o = z2.basepoint();
        let col = c.pushforward(|_| Some(o.clone()), &b2).unwrap();
        assert!(col.chain.is_empty());
        assert_eq!(col.degenerate, c.len());
    }
}
