use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::{format_rational, parse_rational, rat, ChainError, Rational};

/// Denominator of the dyadic approximations used for `power` and `log`.
const DYADIC_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthKind {
    /// `f(t) = 1`
    Const,
    /// `f(t) = t + 1`
    Linear,
    /// `f(t) = (t + 1)^alpha`, `0 < alpha < 1`
    Power(Rational),
    /// `f(t) = 1 + ln(1 + t)`
    Log,
    /// `f(t) = values[t]`, extended by the last value.
    Table(Vec<Rational>),
}

/// A growth control `f` with `f(0) = 1`, non-decreasing.
///
/// `power` and `log` are irrational in general; their exact values are
/// replaced by `round(f(t) * 2^32) / 2^32`, which is still non-decreasing and
/// keeps `f(0) = 1`. [`GrowthFunction::is_exact`] tells which case applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthFunction {
    kind: GrowthKind,
}

fn dyadic(v: f64) -> Rational {
    let scale = (1u64 << DYADIC_BITS) as f64;
    let n = (v * scale).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(1u64 << DYADIC_BITS))
}

impl GrowthFunction {
    pub fn constant() -> Self {
        GrowthFunction { kind: GrowthKind::Const }
    }

    pub fn linear() -> Self {
        GrowthFunction { kind: GrowthKind::Linear }
    }

    pub fn log() -> Self {
        GrowthFunction { kind: GrowthKind::Log }
    }

    pub fn power(alpha: Rational) -> Result<Self, ChainError> {
        if alpha <= Rational::zero() || alpha >= Rational::one() {
            return Err(ChainError::BadGrowth {
                spec: format!("power:{}", format_rational(&alpha)),
                reason: "exponent must lie in (0,1)".into(),
            });
        }
        Ok(GrowthFunction { kind: GrowthKind::Power(alpha) })
    }

    pub fn table(values: Vec<Rational>) -> Result<Self, ChainError> {
        let spec = || format!("table:{}", values.iter().map(format_rational).collect::<Vec<_>>().join(","));
        if values.first() != Some(&Rational::one()) {
            return Err(ChainError::BadGrowth { spec: spec(), reason: "f(0) must equal 1".into() });
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(ChainError::BadGrowth { spec: spec(), reason: "values must be non-decreasing".into() });
        }
        Ok(GrowthFunction { kind: GrowthKind::Table(values) })
    }

    /// Parses `const`, `linear`, `log`, `power:<alpha>` and
    /// `table:<v0>,<v1>,...`.
    pub fn parse(spec: &str) -> Result<Self, ChainError> {
        let spec = spec.trim();
        let bad = |reason: &str| ChainError::BadGrowth { spec: spec.to_string(), reason: reason.to_string() };
        match spec.split_once(':') {
            None => match spec {
                "const" => Ok(Self::constant()),
                "linear" => Ok(Self::linear()),
                "log" => Ok(Self::log()),
                _ => Err(bad("expected const, linear, log, power:<alpha> or table:<values>")),
            },
            Some(("power", a)) => Self::power(parse_rational(a).ok_or_else(|| bad("exponent is not a number"))?),
            Some(("table", vs)) => {
                let values = vs
                    .split(',')
                    .map(|v| parse_rational(v).ok_or_else(|| bad("table entry is not a number")))
                    .collect::<Result<Vec<_>, _>>()?;
                Self::table(values)
            }
            Some(_) => Err(bad("expected const, linear, log, power:<alpha> or table:<values>")),
        }
    }

    pub fn kind(&self) -> &GrowthKind {
        &self.kind
    }

    /// Whether [`GrowthFunction::eval`] returns the true value.
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, GrowthKind::Const | GrowthKind::Linear | GrowthKind::Table(_))
    }

    pub fn is_const(&self) -> bool {
        match &self.kind {
            GrowthKind::Const => true,
            GrowthKind::Table(v) => v.iter().all(|x| x.is_one()),
            _ => false,
        }
    }

    pub fn eval(&self, t: u32) -> Rational {
        match &self.kind {
            GrowthKind::Const => Rational::one(),
            GrowthKind::Linear => rat(t as i64 + 1),
            GrowthKind::Table(v) => v.get(t as usize).unwrap_or_else(|| v.last().unwrap()).clone(),
            GrowthKind::Power(_) | GrowthKind::Log if t == 0 => Rational::one(),
            GrowthKind::Power(_) | GrowthKind::Log => dyadic(self.eval_f64(t)),
        }
    }

    pub fn eval_f64(&self, t: u32) -> f64 {
        let x = t as f64;
        match &self.kind {
            GrowthKind::Const => 1.0,
            GrowthKind::Linear => x + 1.0,
            GrowthKind::Power(a) => (x + 1.0).powf(a.to_f64().unwrap_or(0.5)),
            GrowthKind::Log => 1.0 + x.ln_1p(),
            GrowthKind::Table(_) => super::to_f64(&self.eval(t)),
        }
    }

    /// Checks `f(0) = 1` and monotonicity on `0..=t_max`.
    pub fn validate(&self, t_max: u32) -> Result<(), ChainError> {
        let bad = |reason: String| ChainError::BadGrowth { spec: self.to_string(), reason };
        if !self.eval(0).is_one() {
            return Err(bad("f(0) must equal 1".into()));
        }
        let mut prev = self.eval(0);
        for t in 1..=t_max {
            let v = self.eval(t);
            if v < prev {
                return Err(bad(format!("decreases at t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// Empirical `max f(t+1) - f(t)` over `0..t_max`, the discrete
    /// slow-growth modulus.
    pub fn increment_bound(&self, t_max: u32) -> Rational {
        (0..t_max)
            .map(|t| self.eval(t + 1) - self.eval(t))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GrowthKind::Const => write!(f, "const"),
            GrowthKind::Linear => write!(f, "linear"),
            GrowthKind::Log => write!(f, "log"),
            GrowthKind::Power(a) => write!(f, "power:{}", format_rational(a)),
            GrowthKind::Table(v) => {
                write!(f, "table:{}", v.iter().map(format_rational).collect::<Vec<_>>().join(","))
            }
        }
    }
}

impl FromStr for GrowthFunction {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GrowthFunction::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::ratio;

    #[test]
    fn values() {
        let lin = GrowthFunction::parse("linear").unwrap();
        assert_eq!(lin.eval(0), rat(1));
        assert_eq!(lin.eval(4), rat(5));
        let p = GrowthFunction::parse("power:1/2").unwrap();
        assert_eq!(p.eval(0), rat(1));
        assert_eq!(p.eval(3), rat(2));
        assert!(!p.is_exact());
        let l = GrowthFunction::parse("log").unwrap();
        assert!((l.eval_f64(1) - (1.0 + 2f64.ln())).abs() < 1e-12);
        assert!((crate::chains::to_f64(&l.eval(1)) - l.eval_f64(1)).abs() < 1e-9);
        let t = GrowthFunction::parse("table:1,2,2,3").unwrap();
        assert_eq!(t.eval(10), rat(3));
        assert_eq!(t.to_string(), "table:1/1,2/1,2/1,3/1");
        assert_eq!(GrowthFunction::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GrowthFunction::parse("table:2,3").is_err());
        assert!(GrowthFunction::parse("table:1,3,2").is_err());
        assert!(GrowthFunction::parse("power:1").is_err());
        assert!(GrowthFunction::parse("power:3/2").is_err());
        assert!(GrowthFunction::parse("cubic").is_err());
    }

    #[test]
    fn monotone_on_range() {
        for spec in ["const", "linear", "log", "power:1/2", "power:1/3"] {
            GrowthFunction::parse(spec).unwrap().validate(500).unwrap();
        }
        assert_eq!(GrowthFunction::linear().increment_bound(10), rat(1));
        assert!(GrowthFunction::log().increment_bound(50) < ratio(7, 10));
    }
}
