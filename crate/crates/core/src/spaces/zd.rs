use super::{get_i64, parse_int, put_i64, Group, PointCode, SpaceError};

/// The free abelian group of rank `d` with the standard generators.
#[derive(Debug)]
pub(crate) struct Zd {
    dim: usize,
    gens: Vec<Vec<i64>>,
}

impl Zd {
    pub(crate) fn new(dim: usize) -> Self {
        let mut gens = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1, -1] {
                let mut g = vec![0; dim];
                g[i] = sign;
                gens.push(g);
            }
        }
        Zd { dim, gens }
    }
}

impl Group for Zd {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inv(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }

    fn axis(&self) -> Vec<i64> {
        self.gens[0].clone()
    }

    fn axis_power(&self, a: &Vec<i64>) -> Option<i64> {
        a[1..].iter().all(|&x| x == 0).then_some(a[0])
    }

    fn encode(&self, a: &Vec<i64>) -> PointCode {
        let mut buf = Vec::with_capacity(8 * self.dim);
        for &x in a {
            put_i64(&mut buf, x);
        }
        PointCode(buf)
    }

    fn decode(&self, p: &PointCode) -> Result<Vec<i64>, SpaceError> {
        if p.0.len() != 8 * self.dim {
            return Err(SpaceError::MalformedPoint(format!("{p:?}")));
        }
        Ok((0..self.dim).map(|i| get_i64(&p.0, 8 * i)).collect())
    }

    fn format(&self, a: &Vec<i64>) -> String {
        a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }

    fn parse(&self, s: &str) -> Result<Vec<i64>, SpaceError> {
        let coords = s.split(',').map(parse_int).collect::<Result<Vec<_>, _>>()?;
        if coords.len() != self.dim {
            return Err(SpaceError::MalformedPoint(s.to_string()));
        }
        Ok(coords)
    }

    fn extents(&self, a: &Vec<i64>) -> Option<Vec<u64>> {
        Some(a.iter().map(|x| x.unsigned_abs()).collect())
    }
}
