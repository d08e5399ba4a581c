//! Numeric backends.
//!
//! Everything in this crate is generic over [`Scalar`], which is implemented
//! for `f64` (fast, toleranced) and [`Exact`] (arbitrary-precision rationals,
//! zero tolerance). Rational mode settles equality cases without ambiguity.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational scalar used by the rational arithmetic mode.
pub type Exact = BigRational;

/// Arithmetic mode selector used by campaigns and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Rational,
    Float,
}

impl FromStr for Arithmetic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Self::Rational),
            "float" => Ok(Self::Float),
            other => Err(format!("unknown arithmetic mode `{other}` (expected rational|float)")),
        }
    }
}

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Exact for rationals; identity for floats. `None` for NaN/inf.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_exact(x: &Exact) -> Self;

    fn to_exact(&self) -> Exact;

    fn as_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Breakpoints closer than this are merged during refinement.
    fn dedup_eps() -> Self;

    /// Default tolerance for class-membership predicates.
    fn class_tol() -> Self;

    /// Default tolerance for inequality verdicts.
    fn verdict_tol() -> Self;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_exact(x: &Exact) -> Self {
        ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Exact {
        BigRational::from_float(*self).expect("finite float")
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn dedup_eps() -> Self {
        1e-15
    }

    fn class_tol() -> Self {
        1e-12
    }

    fn verdict_tol() -> Self {
        1e-9
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_exact(x: &Exact) -> Self {
        x.clone()
    }

    fn to_exact(&self) -> Exact {
        self.clone()
    }

    fn as_f64(&self) -> f64 {
        // `Ratio::to_f64` is correctly rounded for big operands.
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn dedup_eps() -> Self {
        Self::zero()
    }

    fn class_tol() -> Self {
        Self::zero()
    }

    fn verdict_tol() -> Self {
        Self::zero()
    }
}

/// Renders a scalar as an exact rational string (`p/q` or `p`).
pub fn exact_string<S: Scalar>(x: &S) -> String {
    let r = x.to_exact();
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a decimal literal (`-0.25`, `1.5e-3`) exactly.
pub fn parse_exact(s: &str) -> Result<Exact, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| format!("invalid numerator in `{t}`"))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| format!("invalid denominator in `{t}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e = t[i + 1..]
                .parse::<i32>()
                .map_err(|_| format!("invalid exponent in `{t}`"))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("invalid number `{t}`"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("invalid number `{t}`"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| format!("invalid number `{t}`"))?;
    if neg {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}
