// SPDX-License-Identifier: Apache-2.0

//! Numbers that are exact rationals when they can be, floats otherwise.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability, likelihood ratio or other real quantity.
///
/// Bernoulli-family computations stay in `Exact`; anything touching the
/// normal family is `Float`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScalarRepr", try_from = "ScalarRepr")]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        match (self, other) {
            (Scalar::Exact(_), Scalar::Exact(b)) if b.is_zero() => None,
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(Scalar::Exact(a / b)),
            _ => {
                let d = other.to_f64();
                (d != 0.0).then(|| Scalar::Float(self.to_f64() / d))
            }
        }
    }

    /// `|self - other|`, exact when both sides are.
    pub fn abs_diff(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact((a - b).abs()),
            _ => Scalar::Float((self.to_f64() - other.to_f64()).abs()),
        }
    }

    /// `weight * first + (1 - weight) * second`.
    ///
    /// The weight is converted to the rational with the same binary value, so
    /// a combination of exact inputs stays exact.
    pub fn convex(weight: f64, first: &Scalar, second: &Scalar) -> Scalar {
        match (first, second) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let w = rational_from_f64(weight).expect("finite weight");
                let rest = BigRational::one() - &w;
                Scalar::Exact(w * a + rest * b)
            }
            _ => Scalar::Float(weight * first.to_f64() + (1.0 - weight) * second.to_f64()),
        }
    }

    /// Equality of two scalars: exact comparison for rationals, absolute
    /// tolerance otherwise.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{} (~{:.6})", r.numer(), r.denom(), self.to_f64()),
            Scalar::Float(x) => write!(f, "{x:.6e}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    value: f64,
    exact: Option<String>,
}

impl From<Scalar> for ScalarRepr {
    fn from(s: Scalar) -> Self {
        ScalarRepr {
            value: s.to_f64(),
            exact: s.as_exact().map(format_rational),
        }
    }
}

impl TryFrom<ScalarRepr> for Scalar {
    type Error = String;

    fn try_from(repr: ScalarRepr) -> std::result::Result<Self, String> {
        match repr.exact {
            Some(text) => parse_rational(&text)
                .map(Scalar::Exact)
                .ok_or_else(|| format!("malformed rational {text:?}")),
            None => Ok(Scalar::Float(repr.value)),
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The rational with exactly the binary value of `x`.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.3"` or
/// `"1e-4"` into the exact rational it denotes.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(at) => (&text[..at], text[at + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// The two parameter spaces the catalog uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterSpace {
    /// θ ∈ (0, 1), the success probability of Bernoulli trials.
    Bernoulli,
    /// μ ∈ ℝ, the mean of a normal population with known σ.
    NormalMean,
}

impl fmt::Display for ParameterSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParameterSpace::Bernoulli => f.write_str("theta in (0,1)"),
            ParameterSpace::NormalMean => f.write_str("mu in R"),
        }
    }
}

/// A point in a parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamValue {
    Theta(#[serde(with = "rational_text")] BigRational),
    Mu(f64),
}

impl ParamValue {
    /// θ from a float, taken at its exact binary value.
    pub fn theta(value: f64) -> Result<Self> {
        let r = rational_from_f64(value).ok_or_else(|| Error::InvalidParameter(format!("theta = {value}")))?;
        Self::theta_exact(r)
    }

    pub fn theta_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Self::theta_exact(BigRational::new(numer.into(), denom.into()))
    }

    /// θ from decimal or `p/q` text, parsed exactly (`"0.3"` is 3/10).
    pub fn parse_theta(text: &str) -> Result<Self> {
        let r = parse_rational(text).ok_or_else(|| Error::InvalidParameter(format!("theta = {text:?}")))?;
        Self::theta_exact(r)
    }

    pub fn theta_exact(value: BigRational) -> Result<Self> {
        let p = ParamValue::Theta(value);
        p.check()?;
        Ok(p)
    }

    pub fn mu(value: f64) -> Result<Self> {
        let p = ParamValue::Mu(value);
        p.check()?;
        Ok(p)
    }

    pub fn space(&self) -> ParameterSpace {
        match self {
            ParamValue::Theta(_) => ParameterSpace::Bernoulli,
            ParamValue::Mu(_) => ParameterSpace::NormalMean,
        }
    }

    /// Verifies the value lies in the open parameter space.
    pub fn check(&self) -> Result<()> {
        match self {
            ParamValue::Theta(t) => {
                if t.is_positive() && *t < BigRational::one() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "theta = {} is outside (0, 1)",
                        format_rational(t)
                    )))
                }
            }
            ParamValue::Mu(m) if m.is_finite() => Ok(()),
            ParamValue::Mu(m) => Err(Error::InvalidParameter(format!("mu = {m}"))),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ParamValue::Theta(t) => rational_to_f64(t),
            ParamValue::Mu(m) => *m,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Theta(t) => write!(f, "theta = {}", format_rational(t)),
            ParamValue::Mu(m) => write!(f, "mu = {m}"),
        }
    }
}

mod rational_text {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text).ok_or_else(|| serde::de::Error::custom(format!("malformed rational {text:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_text_is_exact() {
        assert_eq!(parse_rational("0.3").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(
            parse_rational("1e-4").unwrap(),
            BigRational::new(1.into(), 10000.into())
        );
        assert_eq!(parse_rational("-2.5").unwrap(), BigRational::new((-5).into(), 2.into()));
        assert_eq!(parse_rational("10/3").unwrap(), BigRational::new(10.into(), 3.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("").is_none());
    }

    #[test]
    fn theta_must_be_interior() {
        assert!(ParamValue::theta(0.0).is_err());
        assert!(ParamValue::theta(1.0).is_err());
        assert!(ParamValue::parse_theta("1.5").is_err());
        assert!(ParamValue::theta(0.5).is_ok());
        assert!(ParamValue::mu(f64::NAN).is_err());
    }

    #[test]
    fn convex_combination_stays_exact() {
        let p = Scalar::convex(0.5, &Scalar::ratio(1, 4), &Scalar::ratio(3, 4));
        assert_eq!(p, Scalar::ratio(1, 2));
        let q = Scalar::convex(0.5, &Scalar::Float(0.2), &Scalar::ratio(1, 2));
        assert!((q.to_f64() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn scalar_json_keeps_exact_value() {
        let s = Scalar::ratio(60460, 1 << 20);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("15115/262144"));
        let back: Scalar = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
