use super::{get_i64, parse_int, put_i64, Group, PointCode, SpaceError};

/// Integer Heisenberg group in unitriangular coordinates `(x, y, z)` with
/// `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`, generated by `x` and `y`.
#[derive(Debug)]
pub(crate) struct Heis {
    gens: [[i64; 3]; 4],
}

impl Heis {
    pub(crate) fn new() -> Self {
        Heis {
            gens: [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]],
        }
    }
}

impl Group for Heis {
    type Elem = [i64; 3];

    fn identity(&self) -> [i64; 3] {
        [0, 0, 0]
    }

    fn generators(&self) -> &[[i64; 3]] {
        &self.gens
    }

    fn mul(&self, a: &[i64; 3], b: &[i64; 3]) -> [i64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]]
    }

    fn inv(&self, a: &[i64; 3]) -> [i64; 3] {
        [-a[0], -a[1], -a[2] + a[0] * a[1]]
    }

    fn axis(&self) -> [i64; 3] {
        self.gens[0]
    }

    fn axis_power(&self, a: &[i64; 3]) -> Option<i64> {
        (a[1] == 0 && a[2] == 0).then_some(a[0])
    }

    fn encode(&self, a: &[i64; 3]) -> PointCode {
        let mut buf = Vec::with_capacity(24);
        for &x in a {
            put_i64(&mut buf, x);
        }
        PointCode(buf)
    }

    fn decode(&self, p: &PointCode) -> Result<[i64; 3], SpaceError> {
        if p.0.len() != 24 {
            return Err(SpaceError::MalformedPoint(format!("{p:?}")));
        }
        Ok([get_i64(&p.0, 0), get_i64(&p.0, 8), get_i64(&p.0, 16)])
    }

    fn format(&self, a: &[i64; 3]) -> String {
        format!("{},{},{}", a[0], a[1], a[2])
    }

    fn parse(&self, s: &str) -> Result<[i64; 3], SpaceError> {
        let v = s.split(',').map(parse_int).collect::<Result<Vec<_>, _>>()?;
        match v.as_slice() {
            [a, b, c] => Ok([*a, *b, *c]),
            _ => Err(SpaceError::MalformedPoint(s.to_string())),
        }
    }

    fn extents(&self, a: &[i64; 3]) -> Option<Vec<u64>> {
        // z scales quadratically with the box side.
        let c = a[2].unsigned_abs();
        let mut side = (c as f64).sqrt() as u64;
        while side * side < c {
            side += 1;
        }
        Some(vec![a[0].unsigned_abs(), a[1].unsigned_abs(), side])
    }
}
