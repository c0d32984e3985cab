//! Exact rationals and the float conversions used at report boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"`, a bare integer `"p"`, or a finite decimal `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::InvalidArgument(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(num, scale));
    }
    let int: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(int))
}

/// Canonical `"p/q"` rendering (always with a denominator, in lowest terms).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn nearest_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::MIN } else { f64::MAX })
}

/// Smallest-effort float that is guaranteed `>= r`.
pub fn to_f64_up(r: &Rational) -> f64 {
    let mut f = nearest_f64(r);
    while Rational::from_float(f).is_some_and(|v| &v < r) {
        f = f.next_up();
    }
    f
}

/// Float guaranteed `<= r`.
pub fn to_f64_down(r: &Rational) -> f64 {
    let mut f = nearest_f64(r);
    while Rational::from_float(f).is_some_and(|v| &v > r) {
        f = f.next_down();
    }
    f
}

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn is_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && r <= &Rational::one()
}

pub(crate) mod serde_str {
    //! Serialize a rational as a `"p/q"` string.
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}
