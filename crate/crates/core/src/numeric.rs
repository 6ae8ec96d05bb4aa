//! Scalar types shared by the message-passing engine and the oracles.
//!
//! Graph weights are always stored as exact rationals. Message passing is
//! generic over [`MessageValue`] so the same engine can run in exact mode
//! (certification) or in binary floating point (throughput only).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q`, a signed integer, or a plain decimal such as `-2.75`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Smallest integer `>= q`.
pub fn ceil_to_u64(q: &Rational) -> Option<u64> {
    q.ceil().to_integer().to_u64()
}

/// Numeric field a run operates in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    #[default]
    Exact,
    Float,
}

/// Field operations the min-sum recursions need.
///
/// Values must be totally ordered in practice; `f64` qualifies because
/// messages stay finite for finite weights.
pub trait MessageValue: Clone + PartialOrd + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn is_negative(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn abs_rational(&self) -> Option<Rational>;
}

impl MessageValue for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_rational(&self) -> Option<Rational> {
        Some(self.abs())
    }
}

impl MessageValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs_rational(&self) -> Option<Rational> {
        Rational::from_float(self.abs())
    }
}
