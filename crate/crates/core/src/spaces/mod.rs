//! Bounded-geometry spaces: Cayley graphs of a small menu of groups and the
//! lumberjack comb, with exact ball enumeration and a geodesic-line oracle.

mod ball;
mod bs;
mod free;
mod heis;
mod lamp;
mod lumberjack;
mod zd;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::One;
use thiserror::Error;

use crate::chains::Rational;

pub use ball::{BallIndex, DEFAULT_BALL_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("unknown space family `{0}` (supported: zd:<d>, free:<k>, heis, lamp:<d>, bs:1:<n>, lumberjack[:slope=<s>])")]
    UnknownFamily(String),
    #[error("bad parameter for `{family}`: {reason}")]
    BadParameter { family: String, reason: String },
    #[error("malformed point `{0}`")]
    MalformedPoint(String),
    #[error("ball of radius {radius} exceeds the size cap of {cap} points")]
    BallCapExceeded { radius: u32, cap: usize },
    #[error("space `{0}` has no geodesic-line oracle")]
    NoGeodesicOracle(String),
    #[error("point `{0}` lies outside the ball")]
    NotInBall(String),
    #[error("point `{0}` does not lie on the line")]
    NotOnLine(String),
}

/// Canonical byte encoding of a point. Two points are equal iff their
/// encodings are byte-identical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointCode(Vec<u8>);

impl PointCode {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        PointCode(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for PointCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointCode(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn put_i64(buf: &mut Vec<u8>, v: i64) {
    buf.extend_from_slice(&v.to_be_bytes());
}

pub(crate) fn get_i64(bytes: &[u8], at: usize) -> i64 {
    let mut raw = [0u8; 8];
    raw.copy_from_slice(&bytes[at..at + 8]);
    i64::from_be_bytes(raw)
}

pub(crate) fn parse_int(s: &str) -> Result<i64, SpaceError> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| SpaceError::MalformedPoint(s.to_string()))
}

/// A finitely generated group presented by a concrete normal form.
pub(crate) trait Group: Send + Sync + fmt::Debug {
    type Elem: Clone + PartialEq;

    fn identity(&self) -> Self::Elem;
    /// Symmetric generating set in a fixed order.
    fn generators(&self) -> &[Self::Elem];
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// The designated generator whose cyclic subgroup is an undistorted axis.
    fn axis(&self) -> Self::Elem;
    /// `Some(m)` iff `a` equals `axis^m`.
    fn axis_power(&self, a: &Self::Elem) -> Option<i64>;
    fn encode(&self, a: &Self::Elem) -> PointCode;
    fn decode(&self, p: &PointCode) -> Result<Self::Elem, SpaceError>;
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem, SpaceError>;
    /// Coordinate extents used to build box-shaped candidate sets.
    fn extents(&self, _a: &Self::Elem) -> Option<Vec<u64>> {
        None
    }
}

/// Object-safe view of a space acting on encoded points.
pub(crate) trait Model: Send + Sync + fmt::Debug {
    fn basepoint(&self) -> PointCode;
    fn neighbors(&self, p: &PointCode) -> Result<Vec<PointCode>, SpaceError>;
    fn degree_bound(&self) -> usize;
    fn is_group(&self) -> bool;
    fn has_axis(&self) -> bool;
    fn axis_shift(&self, p: &PointCode, n: i64) -> Result<PointCode, SpaceError>;
    fn axis_offset(&self, from: &PointCode, to: &PointCode) -> Result<Option<i64>, SpaceError>;
    fn format_point(&self, p: &PointCode) -> Result<String, SpaceError>;
    fn parse_point(&self, s: &str) -> Result<PointCode, SpaceError>;
    fn extents(&self, p: &PointCode) -> Result<Option<Vec<u64>>, SpaceError>;
}

#[derive(Debug)]
struct GroupSpace<G: Group> {
    group: G,
}

impl<G: Group> Model for GroupSpace<G> {
    fn basepoint(&self) -> PointCode {
        self.group.encode(&self.group.identity())
    }

    fn neighbors(&self, p: &PointCode) -> Result<Vec<PointCode>, SpaceError> {
        let a = self.group.decode(p)?;
        Ok(self
            .group
            .generators()
            .iter()
            .map(|s| self.group.encode(&self.group.mul(&a, s)))
            .collect())
    }

    fn degree_bound(&self) -> usize {
        self.group.generators().len()
    }

    fn is_group(&self) -> bool {
        true
    }

    fn has_axis(&self) -> bool {
        true
    }

    fn axis_shift(&self, p: &PointCode, n: i64) -> Result<PointCode, SpaceError> {
        let g = if n >= 0 {
            self.group.axis()
        } else {
            self.group.inv(&self.group.axis())
        };
        let mut a = self.group.decode(p)?;
        for _ in 0..n.unsigned_abs() {
            a = self.group.mul(&a, &g);
        }
        Ok(self.group.encode(&a))
    }

    fn axis_offset(&self, from: &PointCode, to: &PointCode) -> Result<Option<i64>, SpaceError> {
        let a = self.group.decode(from)?;
        let b = self.group.decode(to)?;
        Ok(self.group.axis_power(&self.group.mul(&self.group.inv(&a), &b)))
    }

    fn format_point(&self, p: &PointCode) -> Result<String, SpaceError> {
        Ok(self.group.format(&self.group.decode(p)?))
    }

    fn parse_point(&self, s: &str) -> Result<PointCode, SpaceError> {
        Ok(self.group.encode(&self.group.parse(s)?))
    }

    fn extents(&self, p: &PointCode) -> Result<Option<Vec<u64>>, SpaceError> {
        Ok(self.group.extents(&self.group.decode(p)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Capabilities {
    pub has_geodesic_oracle: bool,
    pub is_group: bool,
}

/// A parsed space. Immutable and cheap to clone.
#[derive(Clone, Debug)]
pub struct Space {
    descriptor: String,
    model: Arc<dyn Model>,
}

impl Space {
    pub fn parse(spec: &str) -> Result<Space, SpaceError> {
        let spec = spec.trim();
        let mut parts = spec.split(':');
        let family = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let bad = |reason: &str| SpaceError::BadParameter {
            family: family.to_string(),
            reason: reason.to_string(),
        };
        let positive = |s: Option<&&str>, what: &str| -> Result<usize, SpaceError> {
            let s = s.ok_or_else(|| bad(&format!("missing {what}")))?;
            match s.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(bad(&format!("{what} must be a positive integer, got `{s}`"))),
            }
        };
        let (descriptor, model): (String, Arc<dyn Model>) = match family {
            "zd" => {
                let d = positive(rest.first(), "dimension")?;
                if rest.len() > 1 {
                    return Err(bad("expected zd:<d>"));
                }
                (format!("zd:{d}"), Arc::new(GroupSpace { group: zd::Zd::new(d) }))
            }
            "free" => {
                let k = positive(rest.first(), "rank")?;
                if k > 26 || rest.len() > 1 {
                    return Err(bad("expected free:<k> with 1 <= k <= 26"));
                }
                (format!("free:{k}"), Arc::new(GroupSpace { group: free::Free::new(k) }))
            }
            "heis" => {
                if !rest.is_empty() {
                    return Err(bad("heis takes no parameters"));
                }
                ("heis".to_string(), Arc::new(GroupSpace { group: heis::Heis::new() }))
            }
            "lamp" => {
                let d = positive(rest.first(), "dimension")?;
                if rest.len() > 1 {
                    return Err(bad("expected lamp:<d>"));
                }
                (format!("lamp:{d}"), Arc::new(GroupSpace { group: lamp::Lamp::new(d) }))
            }
            "bs" => {
                if rest.len() != 2 || rest[0] != "1" {
                    return Err(bad("only bs:1:<n> is supported"));
                }
                let n = positive(rest.get(1), "n")?;
                if n < 2 {
                    return Err(bad("n must be at least 2"));
                }
                (format!("bs:1:{n}"), Arc::new(GroupSpace { group: bs::Bs::new(n as i64) }))
            }
            "lumberjack" => {
                let slope = match rest.as_slice() {
                    [] => Rational::one(),
                    [param] => {
                        let value = param
                            .strip_prefix("slope=")
                            .ok_or_else(|| bad("expected lumberjack:slope=<s>"))?;
                        parse_nonneg_rational(value).ok_or_else(|| bad("slope must be a positive number"))?
                    }
                    _ => return Err(bad("expected lumberjack[:slope=<s>]")),
                };
                if slope <= Rational::from_integer(0.into()) {
                    return Err(bad("slope must be positive"));
                }
                let descriptor = if slope.is_one() {
                    "lumberjack".to_string()
                } else {
                    format!("lumberjack:slope={slope}")
                };
                (descriptor, Arc::new(lumberjack::Lumberjack::new(slope)))
            }
            other => return Err(SpaceError::UnknownFamily(other.to_string())),
        };
        Ok(Space { descriptor, model })
    }

    /// Canonical spec string.
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Uniform bound on the number of neighbours (the generating-set size for groups).
    pub fn generator_count(&self) -> usize {
        self.model.degree_bound()
    }

    pub fn basepoint(&self) -> PointCode {
        self.model.basepoint()
    }

    pub fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_geodesic_oracle: self.model.has_axis(),
            is_group: self.model.is_group(),
        }
    }

    /// All points at distance exactly one, in a fixed order.
    pub fn neighbors(&self, p: &PointCode) -> Result<Vec<PointCode>, SpaceError> {
        self.model.neighbors(p)
    }

    pub fn format_point(&self, p: &PointCode) -> Result<String, SpaceError> {
        self.model.format_point(p)
    }

    pub fn parse_point(&self, s: &str) -> Result<PointCode, SpaceError> {
        self.model.parse_point(s)
    }

    pub(crate) fn extents(&self, p: &PointCode) -> Result<Option<Vec<u64>>, SpaceError> {
        self.model.extents(p)
    }

    /// Ball with the process-wide size cap (see [`ball_cap`]).
    pub fn ball(&self, radius: u32) -> Result<BallIndex, SpaceError> {
        BallIndex::build(self, radius, ball_cap())
    }

    pub fn ball_with_cap(&self, radius: u32, cap: usize) -> Result<BallIndex, SpaceError> {
        BallIndex::build(self, radius, cap)
    }

    /// Word length of `p` by breadth-first search from the basepoint.
    pub fn word_length(&self, p: &PointCode, cap: usize) -> Result<u32, SpaceError> {
        ball::bfs_length(self, p, cap)
    }

    fn require_axis(&self) -> Result<(), SpaceError> {
        if self.model.has_axis() {
            Ok(())
        } else {
            Err(SpaceError::NoGeodesicOracle(self.descriptor.clone()))
        }
    }

    /// `p * g^n` for the designated axis generator `g`.
    pub fn axis_shift(&self, p: &PointCode, n: i64) -> Result<PointCode, SpaceError> {
        self.require_axis()?;
        self.model.axis_shift(p, n)
    }

    /// Lines of the geodesic family through `delta`, with their measure.
    ///
    /// The family is the set of left translates of the axis of the designated
    /// generator; exactly one translate passes through every point, so the
    /// result has a single line of weight one. The ball supplies word lengths
    /// and must contain `delta`.
    pub fn lines_through(&self, ball: &BallIndex, delta: &PointCode) -> Result<Vec<GeodesicLine>, SpaceError> {
        self.require_axis()?;
        let len = ball
            .length_of(delta)
            .ok_or_else(|| SpaceError::NotInBall(self.display(delta)))?;
        // The nearest point is within 2|delta| steps along the line; every
        // point at least as close as delta lies inside the ball.
        let mut best = (len, delta.clone());
        for dir in [1i64, -1] {
            let mut q = delta.clone();
            for _ in 0..2 * len as i64 {
                q = self.model.axis_shift(&q, dir)?;
                if let Some(l) = ball.length_of(&q) {
                    if (l, &q) < (best.0, &best.1) {
                        best = (l, q.clone());
                    }
                }
            }
        }
        let base = best.1;
        Ok(vec![GeodesicLine {
            line_id: base.clone(),
            base,
            weight: Rational::one(),
        }])
    }

    /// Same as [`Space::lines_through`], computing the needed ball itself.
    pub fn lines_through_point(&self, delta: &PointCode) -> Result<Vec<GeodesicLine>, SpaceError> {
        self.require_axis()?;
        let len = self.word_length(delta, ball_cap())?;
        let ball = self.ball(len)?;
        self.lines_through(&ball, delta)
    }

    /// Direction (+1 or -1 along the axis) of the subray of `line` starting at
    /// `delta` that avoids the line's base point. At the base itself the
    /// direction whose first step has the smaller encoding wins.
    pub fn ray_direction(&self, line: &GeodesicLine, delta: &PointCode) -> Result<i64, SpaceError> {
        self.require_axis()?;
        let offset = self
            .model
            .axis_offset(&line.base, delta)?
            .ok_or_else(|| SpaceError::NotOnLine(self.display(delta)))?;
        Ok(match offset.signum() {
            0 => {
                let plus = self.model.axis_shift(&line.base, 1)?;
                let minus = self.model.axis_shift(&line.base, -1)?;
                if plus < minus {
                    1
                } else {
                    -1
                }
            }
            s => s,
        })
    }

    /// The `k`-th point of the chosen subray from `delta`; `k = 0` is `delta`.
    pub fn ray_from(&self, line: &GeodesicLine, delta: &PointCode, k: u32) -> Result<PointCode, SpaceError> {
        let dir = self.ray_direction(line, delta)?;
        self.model.axis_shift(delta, dir * k as i64)
    }

    /// Text form of a point, falling back to hex for undecodable codes.
    pub fn display(&self, p: &PointCode) -> String {
        self.format_point(p).unwrap_or_else(|_| format!("{p:?}"))
    }
}

impl FromStr for Space {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Space::parse(s)
    }
}

/// Ball-size cap: `COARSEBOUND_BALL_CAP` if set to a positive integer,
/// otherwise [`DEFAULT_BALL_CAP`].
pub fn ball_cap() -> usize {
    std::env::var("COARSEBOUND_BALL_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_BALL_CAP)
}

/// One unparametrized line of the geodesic family, with its measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicLine {
    /// Canonical identifier of the line: the encoding of its base point.
    pub line_id: PointCode,
    /// The point of the line nearest the basepoint (ties by encoding order).
    pub base: PointCode,
    pub weight: Rational,
}

/// Parses `3`, `3/2` or `1.5` into a non-negative rational.
pub(crate) fn parse_nonneg_rational(s: &str) -> Option<Rational> {
    let r = crate::chains::parse_rational(s)?;
    if r < Rational::from_integer(0.into()) {
        None
    } else {
        Some(r)
    }
}
