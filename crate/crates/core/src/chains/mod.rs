//! Sparse chains with exact rational coefficients, the boundary operator,
//! growth control and pushforward.

mod chain;
mod dump;
mod growth;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::spaces::SpaceError;

pub use chain::{simplex_length, Chain, Pushforward, Simplex};
pub use dump::{parse_dump, write_dump, ChainDump};
pub use growth::{GrowthFunction, GrowthKind};

/// Exact coefficient type.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("vertex `{0}` lies outside the ball")]
    OutsideBall(String),
    #[error("chains of dimension {0} are not supported (0..=2)")]
    BadDimension(usize),
    #[error("simplex has {got} vertices, expected {expected}")]
    WrongArity { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("point `{0}` is not in the domain of the map")]
    Unmapped(String),
    #[error("bad growth function `{spec}`: {reason}")]
    BadGrowth { spec: String, reason: String },
    #[error("chain dump line {line}: {reason}")]
    Dump { line: usize, reason: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Parses `3`, `-3/2`, `1.5` or `-0.25` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return None;
        }
        if !int_digits.bytes().all(|c| c.is_ascii_digit()) || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Some(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// `num/den` text form, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Lossy conversion for reporting.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("3"), Some(rat(3)));
        assert_eq!(parse_rational("-3/6"), Some(ratio(-1, 2)));
        assert_eq!(parse_rational("1.5"), Some(ratio(3, 2)));
        assert_eq!(parse_rational("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("1.2.3"), None);
        assert_eq!(format_rational(&rat(4)), "4/1");
        assert_eq!(format_rational(&ratio(-6, 4)), "-3/2");
    }
}
