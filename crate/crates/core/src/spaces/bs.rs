use super::{get_i64, parse_int, put_i64, Group, PointCode, SpaceError};

/// `BS(1,n) = <a, b | a b a^-1 = b^n>` in its affine model: `(k, q)` acts by
/// `x -> n^k x + q` with `q` in `Z[1/n]`, `a = (1, 0)`, `b = (0, 1)`.
#[derive(Debug)]
pub(crate) struct Bs {
    n: i64,
    gens: [BsElem; 4],
}

/// `q = num / n^exp`, normalized so that `exp == 0` or `n` does not divide `num`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct BsElem {
    k: i64,
    num: i64,
    exp: u32,
}

impl Bs {
    pub(crate) fn new(n: i64) -> Self {
        let e = |k, num| BsElem { k, num, exp: 0 };
        Bs {
            n,
            gens: [e(1, 0), e(-1, 0), e(0, 1), e(0, -1)],
        }
    }

    fn normalize(&self, mut num: i128, mut exp: u32) -> (i64, u32) {
        if num == 0 {
            return (0, 0);
        }
        let n = self.n as i128;
        while exp > 0 && num % n == 0 {
            num /= n;
            exp -= 1;
        }
        (i64::try_from(num).expect("BS(1,n) coordinate overflow"), exp)
    }

    /// `n^shift * num / n^exp` as a normalized pair.
    fn scale(&self, num: i64, exp: u32, shift: i64) -> (i128, u32) {
        let n = self.n as i128;
        if shift >= 0 {
            ((num as i128) * n.pow(shift as u32), exp)
        } else {
            (num as i128, exp + shift.unsigned_abs() as u32)
        }
    }

    fn add(&self, a: (i128, u32), b: (i128, u32)) -> (i64, u32) {
        let n = self.n as i128;
        let e = a.1.max(b.1);
        let lift = |(num, exp): (i128, u32)| num * n.pow(e - exp);
        self.normalize(lift(a) + lift(b), e)
    }
}

impl Group for Bs {
    type Elem = BsElem;

    fn identity(&self) -> BsElem {
        BsElem { k: 0, num: 0, exp: 0 }
    }

    fn generators(&self) -> &[BsElem] {
        &self.gens
    }

    fn mul(&self, a: &BsElem, b: &BsElem) -> BsElem {
        let moved = self.scale(b.num, b.exp, a.k);
        let (num, exp) = self.add(moved, (a.num as i128, a.exp));
        BsElem { k: a.k + b.k, num, exp }
    }

    fn inv(&self, a: &BsElem) -> BsElem {
        let (num, exp) = self.scale(-a.num, a.exp, -a.k);
        let (num, exp) = self.normalize(num, exp);
        BsElem { k: -a.k, num, exp }
    }

    fn axis(&self) -> BsElem {
        self.gens[0]
    }

    fn axis_power(&self, a: &BsElem) -> Option<i64> {
        (a.num == 0).then_some(a.k)
    }

    fn encode(&self, a: &BsElem) -> PointCode {
        let mut buf = Vec::with_capacity(20);
        put_i64(&mut buf, a.k);
        put_i64(&mut buf, a.num);
        buf.extend_from_slice(&a.exp.to_be_bytes());
        PointCode(buf)
    }

    fn decode(&self, p: &PointCode) -> Result<BsElem, SpaceError> {
        let bad = || SpaceError::MalformedPoint(format!("{p:?}"));
        if p.0.len() != 20 {
            return Err(bad());
        }
        let k = get_i64(&p.0, 0);
        let num = get_i64(&p.0, 8);
        let exp = u32::from_be_bytes([p.0[16], p.0[17], p.0[18], p.0[19]]);
        if (num == 0 && exp != 0) || (exp > 0 && num % self.n == 0) {
            return Err(bad());
        }
        Ok(BsElem { k, num, exp })
    }

    fn format(&self, a: &BsElem) -> String {
        format!("{}|{}/{}", a.k, a.num, self.n.pow(a.exp))
    }

    fn parse(&self, s: &str) -> Result<BsElem, SpaceError> {
        let bad = || SpaceError::MalformedPoint(s.to_string());
        let (k, q) = s.trim().split_once('|').ok_or_else(bad)?;
        let k = parse_int(k)?;
        let (num, den) = match q.split_once('/') {
            Some((num, den)) => (parse_int(num)?, parse_int(den)?),
            None => (parse_int(q)?, 1),
        };
        let mut exp = 0u32;
        let mut d = den;
        while d > 1 && d % self.n == 0 {
            d /= self.n;
            exp += 1;
        }
        if d != 1 {
            return Err(bad());
        }
        let (num, exp) = self.normalize(num as i128, exp);
        Ok(BsElem { k, num, exp })
    }

    fn extents(&self, a: &BsElem) -> Option<Vec<u64>> {
        let den = self.n.pow(a.exp);
        let ceil_abs = a.num.unsigned_abs().div_ceil(den as u64);
        Some(vec![a.k.unsigned_abs(), a.exp as u64, ceil_abs])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relation_holds() {
        let g = Bs::new(2);
        let [a, a_inv, b, _] = g.gens;
        let lhs = g.mul(&g.mul(&a, &b), &a_inv);
        let b2 = g.mul(&b, &b);
        assert_eq!(lhs, b2);
        assert_eq!(g.format(&lhs), "0|2/1");
    }

    #[test]
    fn inverses_and_dyadics() {
        let g = Bs::new(2);
        let x = g.parse("-2|3/4").unwrap();
        assert_eq!(g.mul(&x, &g.inv(&x)), g.identity());
        assert_eq!(g.format(&g.parse("1|6/4").unwrap()), "1|3/2");
        assert!(g.parse("0|1/3").is_err());
        let [_, a_inv, b, _] = g.gens;
        // a^-1 b a = b^(1/2) acting as x -> x + 1/2
        let half = g.mul(&g.mul(&a_inv, &b), &g.gens[0]);
        assert_eq!(g.format(&half), "0|1/2");
    }
}
