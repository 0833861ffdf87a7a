use num_traits::ToPrimitive;

use super::{get_i64, parse_int, put_i64, Model, PointCode, SpaceError};
use crate::chains::Rational;

/// The comb `N x {0}` with a vertical tooth of height `ceil(slope * n)` above
/// every `n`, with its path metric. Not a group and has no geodesic oracle.
#[derive(Debug)]
pub(crate) struct Lumberjack {
    slope: Rational,
}

impl Lumberjack {
    pub(crate) fn new(slope: Rational) -> Self {
        Lumberjack { slope }
    }

    fn height(&self, x: i64) -> i64 {
        let h = (&self.slope * Rational::from_integer(x.into())).ceil();
        h.to_integer().to_i64().expect("tooth height overflow")
    }

    fn decode(&self, p: &PointCode) -> Result<(i64, i64), SpaceError> {
        if p.0.len() != 16 {
            return Err(SpaceError::MalformedPoint(format!("{p:?}")));
        }
        let (x, y) = (get_i64(&p.0, 0), get_i64(&p.0, 8));
        if x < 0 || y < 0 || y > self.height(x) {
            return Err(SpaceError::MalformedPoint(format!("{x},{y}")));
        }
        Ok((x, y))
    }

    fn encode(x: i64, y: i64) -> PointCode {
        let mut buf = Vec::with_capacity(16);
        put_i64(&mut buf, x);
        put_i64(&mut buf, y);
        PointCode(buf)
    }
}

impl Model for Lumberjack {
    fn basepoint(&self) -> PointCode {
        Lumberjack::encode(0, 0)
    }

    fn neighbors(&self, p: &PointCode) -> Result<Vec<PointCode>, SpaceError> {
        let (x, y) = self.decode(p)?;
        let mut out = Vec::with_capacity(3);
        if y == 0 {
            if x > 0 {
                out.push(Lumberjack::encode(x - 1, 0));
            }
            out.push(Lumberjack::encode(x + 1, 0));
        } else {
            out.push(Lumberjack::encode(x, y - 1));
        }
        if y < self.height(x) {
            out.push(Lumberjack::encode(x, y + 1));
        }
        Ok(out)
    }

    fn degree_bound(&self) -> usize {
        3
    }

    fn is_group(&self) -> bool {
        false
    }

    fn has_axis(&self) -> bool {
        false
    }

    fn axis_shift(&self, _p: &PointCode, _n: i64) -> Result<PointCode, SpaceError> {
        Err(SpaceError::NoGeodesicOracle("lumberjack".into()))
    }

    fn axis_offset(&self, _from: &PointCode, _to: &PointCode) -> Result<Option<i64>, SpaceError> {
        Err(SpaceError::NoGeodesicOracle("lumberjack".into()))
    }

    fn format_point(&self, p: &PointCode) -> Result<String, SpaceError> {
        let (x, y) = self.decode(p)?;
        Ok(format!("{x},{y}"))
    }

    fn parse_point(&self, s: &str) -> Result<PointCode, SpaceError> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| SpaceError::MalformedPoint(s.to_string()))?;
        let p = Lumberjack::encode(parse_int(x)?, parse_int(y)?);
        self.decode(&p)?;
        Ok(p)
    }

    fn extents(&self, p: &PointCode) -> Result<Option<Vec<u64>>, SpaceError> {
        let (x, y) = self.decode(p)?;
        Ok(Some(vec![x as u64, y as u64]))
    }
}

/// Metric of the comb: along the trunk between teeth, otherwise within a tooth.
#[cfg(test)]
pub(crate) fn comb_distance(a: (i64, i64), b: (i64, i64)) -> i64 {
    if a.0 == b.0 {
        (a.1 - b.1).abs()
    } else {
        a.1 + (a.0 - b.0).abs() + b.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Space;

    #[test]
    fn teeth_grow_with_slope() {
        let lj = Lumberjack::new(Rational::new(3.into(), 2.into()));
        assert_eq!(lj.height(0), 0);
        assert_eq!(lj.height(1), 2);
        assert_eq!(lj.height(3), 5);
    }

    #[test]
    fn neighbors_are_metric_unit_steps() {
        let space = Space::parse("lumberjack").unwrap();
        let ball = space.ball(6).unwrap();
        for (i, p) in ball.points().iter().enumerate() {
            let a = space.display(p);
            let (ax, ay) = a.split_once(',').unwrap();
            let pa = (ax.parse().unwrap(), ay.parse().unwrap());
            for &j in ball.neighbors(i) {
                let b = space.display(&ball.points()[j]);
                let (bx, by) = b.split_once(',').unwrap();
                assert_eq!(comb_distance(pa, (bx.parse().unwrap(), by.parse().unwrap())), 1);
            }
            // BFS length equals the comb distance to the basepoint.
            assert_eq!(comb_distance(pa, (0, 0)), ball.length(i) as i64);
        }
    }
}
