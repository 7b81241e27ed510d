//! Numeric values stored in chains.
//!
//! A chain is generic over a [`Scalar`], which is either an exact
//! arbitrary-precision rational ([`Rational`]) or an `f64`. The choice is made
//! once, at construction, so exact and floating values can never be mixed in
//! one chain.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Row sums in float mode must lie within this absolute distance of 1.
pub const FLOAT_ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Relative tolerance used when a float result is compared against a
/// qualitative classification (for example "is this probability 1").
pub const FLOAT_CLASSIFY_TOLERANCE: f64 = 1e-12;

/// Arithmetic mode of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "rational" => Ok(Mode::Exact),
            "float" | "f64" => Ok(Mode::Float),
            other => Err(Error::InvalidParams(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

/// Probability and cost values.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: Mode;

    fn from_rational(value: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// False for NaN and infinities; always true for rationals.
    fn is_finite_value(&self) -> bool;

    /// Whether `self` is an acceptable row sum of a stochastic matrix.
    fn is_unit_sum(&self) -> bool;

    /// Equality for classification purposes: exact for rationals, relative
    /// tolerance [`FLOAT_CLASSIFY_TOLERANCE`] for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    /// Lossless text form: `num/den` for rationals, shortest round-trip
    /// decimal for floats.
    fn to_text(&self) -> String;

    /// Solves `a · X = rhs` for a square `a` and a matrix of right-hand
    /// sides (one column per system).
    fn solve(a: Vec<Vec<Self>>, rhs: Vec<Vec<Self>>) -> Result<Vec<Vec<Self>>>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text).map(|r| Self::from_rational(&r))
    }

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn is_unit_sum(&self) -> bool {
        self.is_one()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn solve(a: Vec<Vec<Self>>, rhs: Vec<Vec<Self>>) -> Result<Vec<Vec<Self>>> {
        linalg::solve_rational(&a, &rhs)
    }

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(value: &Rational) -> Self {
        rational_to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn is_unit_sum(&self) -> bool {
        (self - 1.0).abs() <= FLOAT_ROW_SUM_TOLERANCE
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = self.abs().max(other.abs()).max(1.0);
        (self - other).abs() <= FLOAT_CLASSIFY_TOLERANCE * scale
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn solve(a: Vec<Vec<Self>>, rhs: Vec<Vec<Self>>) -> Result<Vec<Vec<Self>>> {
        linalg::solve_f64(a, rhs)
    }

    fn powi(&self, exp: u32) -> Self {
        f64::powi(*self, exp as i32)
    }
}

/// Nearest `f64` to an exact rational, robust to huge numerators and
/// denominators whose individual conversions would overflow.
pub fn rational_to_f64(value: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (value.numer().to_f64(), value.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let bits_n = value.numer().bits() as i64;
    let bits_d = value.denom().bits() as i64;
    // Scale so the integer quotient carries ~64 significant bits.
    let shift = 64 - (bits_n - bits_d);
    let (num, den) = if shift >= 0 {
        (value.numer() << shift as usize, value.denom().clone())
    } else {
        (value.numer().clone(), value.denom() << (-shift) as usize)
    };
    let q = (num / den).to_f64().unwrap_or(f64::NAN);
    // Two factors so that neither power underflows on its own.
    let half = (shift / 2) as i32;
    q * 2f64.powi(-half) * 2f64.powi(half - shift as i32)
}

/// A value that is either finite or `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtScalar<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> ExtScalar<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            ExtScalar::Finite(v) => Some(v),
            ExtScalar::Infinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtScalar::Finite(v) => v.to_f64(),
            ExtScalar::Infinity => f64::INFINITY,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            ExtScalar::Finite(v) => v.to_text(),
            ExtScalar::Infinity => "inf".to_string(),
        }
    }
}

/// Parses a number literal into an exact rational.
///
/// Accepted forms, with an optional leading `-` or `+`:
///
/// * a ratio of two non-negative integers, `16/65024`;
/// * a decimal, `0.01`, `.5`, `3600`, optionally with an exponent, `1e-3`.
///
/// Decimals are read as exact decimal fractions, so `0.01` is exactly `1/100`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let invalid = || Error::InvalidNumber(text.to_string());
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    if body.is_empty() {
        return Err(invalid());
    }

    let value = if let Some((n, d)) = body.split_once('/') {
        let n = parse_digits(n).ok_or_else(invalid)?;
        let d = parse_digits(d).ok_or_else(invalid)?;
        if d.is_zero() {
            return Err(invalid());
        }
        Rational::new(n, d)
    } else {
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(at) => {
                let exp: i32 = body[at + 1..].parse().map_err(|_| invalid())?;
                (&body[..at], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        let digits = format!("{int_part}{frac_part}");
        let n = parse_digits(&digits).ok_or_else(invalid)?;
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10);
        if scale >= 0 {
            Rational::from_integer(n * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(n, num_traits::pow(ten, (-scale) as usize))
        }
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub(crate) fn abs<S: Scalar>(x: &S) -> S {
    if x.is_negative_value() {
        -x.clone()
    } else {
        x.clone()
    }
}
