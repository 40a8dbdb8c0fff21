//! Exact-or-approximate real numbers.
//!
//! Window endpoints and sphere eigenvalues are rationals, and comparing them
//! as floats would merge or split breakpoints spuriously. A [`Scalar`] stays
//! an exact `i64` ratio as long as every operation it goes through is exact
//! (including square roots of perfect rational squares) and silently
//! degrades to `f64` otherwise. Any comparison involving an approximate
//! value uses the absolute tolerance [`FLOAT_TOLERANCE`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Absolute tolerance for comparisons that involve a floating-point value.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    Exact(Rational64),
    Approx(f64),
}

impl Scalar {
    pub fn int(value: i64) -> Self {
        Scalar::Exact(Rational64::from_integer(value))
    }

    /// `numer / denom`; panics on a zero denominator like [`Rational64::new`].
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Scalar::Exact(Rational64::new(numer, denom))
    }

    pub fn float(value: f64) -> Self {
        Scalar::Approx(value)
    }

    pub fn zero() -> Self {
        Scalar::int(0)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(self) -> Option<Rational64> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        match self {
            Scalar::Exact(_) => true,
            Scalar::Approx(v) => v.is_finite(),
        }
    }

    /// Equality: exact when both sides are exact, within [`FLOAT_TOLERANCE`] otherwise.
    pub fn approx_eq(self, other: Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= FLOAT_TOLERANCE,
        }
    }

    /// Three-way comparison that reports `Equal` under [`Scalar::approx_eq`].
    pub fn cmp_tol(self, other: Scalar) -> Ordering {
        if self.approx_eq(other) {
            return Ordering::Equal;
        }
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(&b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    pub fn lt(self, other: Scalar) -> bool {
        self.cmp_tol(other) == Ordering::Less
    }

    pub fn le(self, other: Scalar) -> bool {
        self.cmp_tol(other) != Ordering::Greater
    }

    pub fn gt(self, other: Scalar) -> bool {
        self.cmp_tol(other) == Ordering::Greater
    }

    pub fn ge(self, other: Scalar) -> bool {
        self.cmp_tol(other) != Ordering::Less
    }

    pub fn is_zero(self) -> bool {
        self.approx_eq(Scalar::zero())
    }

    pub fn is_negative(self) -> bool {
        self.lt(Scalar::zero())
    }

    pub fn is_positive(self) -> bool {
        self.gt(Scalar::zero())
    }

    pub fn abs(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(v) => Scalar::Approx(v.abs()),
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other.lt(self) {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other.gt(self) {
            other
        } else {
            self
        }
    }

    pub fn square(self) -> Scalar {
        self * self
    }

    /// Square root, exact when `self` is the square of a rational.
    ///
    /// Values within [`FLOAT_TOLERANCE`] below zero are clamped to zero;
    /// anything more negative yields `None`.
    pub fn sqrt(self) -> Option<Scalar> {
        match self {
            Scalar::Exact(r) => {
                if r.is_negative() {
                    return None;
                }
                match (isqrt_exact(*r.numer()), isqrt_exact(*r.denom())) {
                    (Some(p), Some(q)) => Some(Scalar::Exact(Rational64::new(p, q))),
                    _ => Some(Scalar::Approx(r.to_f64()?.sqrt())),
                }
            }
            Scalar::Approx(v) => {
                if v < -FLOAT_TOLERANCE {
                    None
                } else {
                    Some(Scalar::Approx(v.max(0.0).sqrt()))
                }
            }
        }
    }

    /// Human-oriented form: `p/q` (or an integer) when exact, a decimal otherwise.
    pub fn display(self) -> String {
        self.to_string()
    }
}

fn isqrt_exact(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let guess = (v as f64).sqrt().round() as i64;
    (guess.saturating_sub(1)..=guess.saturating_add(1))
        .find(|&c| c >= 0 && (c as i128) * (c as i128) == v as i128)
}

fn promote(
    lhs: Scalar,
    rhs: Scalar,
    exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
    approx: impl Fn(f64, f64) -> f64,
) -> Scalar {
    if let (Scalar::Exact(a), Scalar::Exact(b)) = (lhs, rhs) {
        if let Some(r) = exact(&a, &b) {
            return Scalar::Exact(r);
        }
    }
    Scalar::Approx(approx(lhs.to_f64(), rhs.to_f64()))
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        promote(self, rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        promote(self, rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        promote(self, rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        promote(
            self,
            rhs,
            |a, b| if b.is_zero() { None } else { a.checked_div(b) },
            |a, b| a / b,
        )
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl Add<i64> for Scalar {
    type Output = Scalar;
    fn add(self, rhs: i64) -> Scalar {
        self + Scalar::int(rhs)
    }
}

impl Sub<i64> for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: i64) -> Scalar {
        self - Scalar::int(rhs)
    }
}

impl Mul<i64> for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: i64) -> Scalar {
        self * Scalar::int(rhs)
    }
}

impl Div<i64> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: i64) -> Scalar {
        self / Scalar::int(rhs)
    }
}

impl From<i64> for Scalar {
    fn from(value: i64) -> Self {
        Scalar::int(value)
    }
}

impl From<Rational64> for Scalar {
    fn from(value: Rational64) -> Self {
        Scalar::Exact(value)
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Scalar::Approx(value)
    }
}

/// Tolerance-aware equality, see [`Scalar::approx_eq`]. Not transitive across
/// approximate values.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(*other)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Scalar::Exact(r) if *r.denom() == 1 => r.numer().to_string(),
            Scalar::Exact(r) => format!("{}/{}", r.numer(), r.denom()),
            // avoid "-0"
            Scalar::Approx(v) if *v == 0.0 => "0".to_string(),
            Scalar::Approx(v) => format_float(*v),
        };
        f.pad(&text)
    }
}

/// Shortest round-tripping text for `v`, switching to exponent notation
/// outside `[1e-4, 1e15)`.
pub fn format_float(v: f64) -> String {
    let magnitude = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&magnitude) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseScalarError(pub String);

impl FromStr for Scalar {
    type Err = ParseScalarError;

    /// Accepts integers, `p/q` rationals and decimal literals. Integers,
    /// rationals and plain decimals that fit in `i64` parse exactly;
    /// exponent notation and over-long decimals parse as floats.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let err = || ParseScalarError(s.to_string());
        if text.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = text.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            return Ok(Scalar::ratio(p, q));
        }
        if let Ok(i) = text.parse::<i64>() {
            return Ok(Scalar::int(i));
        }
        if let Some(exact) = parse_plain_decimal(text) {
            return Ok(Scalar::Exact(exact));
        }
        let value: f64 = text.parse().map_err(|_| err())?;
        if !value.is_finite() {
            return Err(err());
        }
        Ok(Scalar::Approx(value))
    }
}

fn parse_plain_decimal(text: &str) -> Option<Rational64> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if frac_part.len() > 15
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mantissa: i64 = digits.parse().ok()?;
    let scale = 10_i64.checked_pow(frac_part.len() as u32)?;
    let value = Rational64::new(mantissa, scale);
    Some(if negative { -value } else { value })
}

/// Serialized as `{"display": "3/2", "value": 1.5}`.
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("Scalar", 3)?;
        state.serialize_field("display", &self.display())?;
        state.serialize_field("exact", &self.is_exact())?;
        state.serialize_field("value", &self.to_f64())?;
        state.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let x = Scalar::ratio(3, 2) + Scalar::ratio(1, 2);
        assert_eq!(x.as_exact(), Some(Rational64::from_integer(2)));
        let y = Scalar::ratio(3, 2) * Scalar::int(4) / Scalar::int(3);
        assert_eq!(y.as_exact(), Some(Rational64::from_integer(2)));
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        let x = Scalar::ratio(1, 3) + Scalar::float(0.5);
        assert!(!x.is_exact());
        assert!((x.to_f64() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_of_perfect_square_is_exact() {
        assert_eq!(Scalar::ratio(9, 4).sqrt().unwrap().as_exact(), Some(Rational64::new(3, 2)));
        let r3 = Scalar::int(3).sqrt().unwrap();
        assert!(!r3.is_exact());
        assert!((r3.to_f64() - 3f64.sqrt()).abs() < 1e-15);
        assert!(Scalar::int(-1).sqrt().is_none());
        assert_eq!(Scalar::float(-1e-12).sqrt().unwrap().to_f64(), 0.0);
    }

    #[test]
    fn tolerance_applies_only_to_floats() {
        assert!(Scalar::float(1.0 + 1e-11).approx_eq(Scalar::int(1)));
        assert!(!Scalar::ratio(1_000_000_001, 1_000_000_000).approx_eq(Scalar::int(1)));
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Scalar::int(i64::MAX / 2);
        let prod = big * big;
        assert!(!prod.is_exact());
        assert!(prod.to_f64() > 1e36);
    }

    #[test]
    fn division_by_exact_zero_does_not_panic() {
        let q = Scalar::int(1) / Scalar::int(0);
        assert!(!q.is_finite());
    }

    #[test]
    fn parse_literals() {
        assert_eq!("3/2".parse::<Scalar>().unwrap().as_exact(), Some(Rational64::new(3, 2)));
        assert_eq!("-0.5".parse::<Scalar>().unwrap().as_exact(), Some(Rational64::new(-1, 2)));
        assert_eq!("7".parse::<Scalar>().unwrap().as_exact(), Some(Rational64::from_integer(7)));
        let f = "1e-3".parse::<Scalar>().unwrap();
        assert!(!f.is_exact());
        assert!("abc".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Scalar::ratio(-3, 2).to_string(), "-3/2");
        assert_eq!(Scalar::int(4).to_string(), "4");
        assert_eq!(Scalar::float(0.25).to_string(), "0.25");
        assert_eq!(Scalar::float(-0.0).to_string(), "0");
    }
}
