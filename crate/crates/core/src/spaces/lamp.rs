use std::collections::BTreeSet;

use super::{get_i64, parse_int, put_i64, Group, PointCode, SpaceError};

/// Lamplighter group `Z/2 wr Z^d`: a cursor position and a finite set of lit
/// lamps. Generators move the cursor along a coordinate axis or flip the lamp
/// under the cursor.
#[derive(Debug)]
pub(crate) struct Lamp {
    dim: usize,
    gens: Vec<LampElem>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct LampElem {
    pos: Vec<i64>,
    lamps: BTreeSet<Vec<i64>>,
}

fn shifted<'a>(lamps: &'a BTreeSet<Vec<i64>>, by: &[i64], sign: i64) -> impl Iterator<Item = Vec<i64>> + 'a {
    let by = by.to_vec();
    lamps
        .iter()
        .map(move |l| l.iter().zip(&by).map(|(a, b)| a + sign * b).collect())
}

impl Lamp {
    pub(crate) fn new(dim: usize) -> Self {
        let mut gens = Vec::with_capacity(2 * dim + 1);
        for i in 0..dim {
            for sign in [1, -1] {
                let mut pos = vec![0; dim];
                pos[i] = sign;
                gens.push(LampElem { pos, lamps: BTreeSet::new() });
            }
        }
        gens.push(LampElem {
            pos: vec![0; dim],
            lamps: BTreeSet::from([vec![0; dim]]),
        });
        Lamp { dim, gens }
    }

    fn parse_coords(&self, s: &str) -> Result<Vec<i64>, SpaceError> {
        let v = s.split(',').map(parse_int).collect::<Result<Vec<_>, _>>()?;
        if v.len() != self.dim {
            return Err(SpaceError::MalformedPoint(s.to_string()));
        }
        Ok(v)
    }

    fn fmt_coords(v: &[i64]) -> String {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl Group for Lamp {
    type Elem = LampElem;

    fn identity(&self) -> LampElem {
        LampElem {
            pos: vec![0; self.dim],
            lamps: BTreeSet::new(),
        }
    }

    fn generators(&self) -> &[LampElem] {
        &self.gens
    }

    fn mul(&self, a: &LampElem, b: &LampElem) -> LampElem {
        let mut lamps = a.lamps.clone();
        for l in shifted(&b.lamps, &a.pos, 1) {
            if !lamps.remove(&l) {
                lamps.insert(l);
            }
        }
        LampElem {
            pos: a.pos.iter().zip(&b.pos).map(|(x, y)| x + y).collect(),
            lamps,
        }
    }

    fn inv(&self, a: &LampElem) -> LampElem {
        LampElem {
            pos: a.pos.iter().map(|x| -x).collect(),
            lamps: shifted(&a.lamps, &a.pos, -1).collect(),
        }
    }

    fn axis(&self) -> LampElem {
        self.gens[0].clone()
    }

    fn axis_power(&self, a: &LampElem) -> Option<i64> {
        (a.lamps.is_empty() && a.pos[1..].iter().all(|&x| x == 0)).then_some(a.pos[0])
    }

    fn encode(&self, a: &LampElem) -> PointCode {
        let mut buf = Vec::with_capacity(8 * self.dim * (1 + a.lamps.len()));
        for &x in a.pos.iter().chain(a.lamps.iter().flatten()) {
            put_i64(&mut buf, x);
        }
        PointCode(buf)
    }

    fn decode(&self, p: &PointCode) -> Result<LampElem, SpaceError> {
        let width = 8 * self.dim;
        if p.0.len() < width || !p.0.len().is_multiple_of(width) {
            return Err(SpaceError::MalformedPoint(format!("{p:?}")));
        }
        let read = |k: usize| -> Vec<i64> { (0..self.dim).map(|i| get_i64(&p.0, k * width + 8 * i)).collect() };
        let pos = read(0);
        let mut lamps = BTreeSet::new();
        let mut prev: Option<Vec<i64>> = None;
        for k in 1..p.0.len() / width {
            let l = read(k);
            if prev.as_ref().is_some_and(|q| *q >= l) {
                return Err(SpaceError::MalformedPoint(format!("{p:?}")));
            }
            prev = Some(l.clone());
            lamps.insert(l);
        }
        Ok(LampElem { pos, lamps })
    }

    fn format(&self, a: &LampElem) -> String {
        let sep = if self.dim == 1 { "," } else { ";" };
        let lamps: Vec<String> = a.lamps.iter().map(|l| Lamp::fmt_coords(l)).collect();
        format!("{}|{}", Lamp::fmt_coords(&a.pos), lamps.join(sep))
    }

    fn parse(&self, s: &str) -> Result<LampElem, SpaceError> {
        let (pos, lamps) = s
            .trim()
            .split_once('|')
            .ok_or_else(|| SpaceError::MalformedPoint(s.to_string()))?;
        let pos = self.parse_coords(pos)?;
        let mut set = BTreeSet::new();
        if !lamps.is_empty() {
            let items: Vec<Vec<i64>> = if self.dim == 1 {
                lamps.split(',').map(|x| parse_int(x).map(|v| vec![v])).collect::<Result<_, _>>()?
            } else {
                lamps.split(';').map(|x| self.parse_coords(x)).collect::<Result<_, _>>()?
            };
            for l in items {
                if !set.insert(l) {
                    return Err(SpaceError::MalformedPoint(s.to_string()));
                }
            }
        }
        Ok(LampElem { pos, lamps: set })
    }

    fn extents(&self, a: &LampElem) -> Option<Vec<u64>> {
        let mut ext: Vec<u64> = a.pos.iter().map(|x| x.unsigned_abs()).collect();
        for i in 0..self.dim {
            ext.push(a.lamps.iter().map(|l| l[i].unsigned_abs()).max().unwrap_or(0));
        }
        Some(ext)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_laws() {
        let g = Lamp::new(1);
        let a = g.parse("2|-1,0,3").unwrap();
        let b = g.parse("-1|1,4").unwrap();
        assert_eq!(g.mul(&a, &g.inv(&a)), g.identity());
        assert_eq!(g.mul(&g.inv(&b), &b), g.identity());
        let c = g.parse("1|0").unwrap();
        assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
        assert_eq!(g.format(&g.decode(&g.encode(&a)).unwrap()), "2|-1,0,3");
    }

    #[test]
    fn flip_acts_at_cursor() {
        let g = Lamp::new(2);
        let flip = g.gens[4].clone();
        let a = g.parse("1,2|").unwrap();
        assert_eq!(g.format(&g.mul(&a, &flip)), "1,2|1,2");
    }
}
