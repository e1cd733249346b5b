//! Exact-number helpers: decimal and `num/den` parsing, rendering, and
//! conversion to floats and 64-bit fixed-point thresholds.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ModelError;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Parses `3`, `-0.125`, `1e-12`, `2.5E3` or `1/12` into an exact rational.
/// Decimal text is taken at its written value, not its binary float value.
pub fn parse_decimal(text: &str) -> Result<BigRational, ModelError> {
    let bad = || ModelError::InvalidNumber(text.to_string());
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `num/den` text, or just `num` for integers.
pub fn render(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `num/den` always, including `1/1`.
pub fn render_fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `floor(p * 2^64)` for `p` in [0, 1]; `1` maps to `2^64`.
pub fn to_fixed64(p: &BigRational) -> u128 {
    if !p.is_positive() {
        return 0;
    }
    if *p >= BigRational::one() {
        return 1u128 << 64;
    }
    let scaled = (p * BigRational::from_integer(BigInt::from(BigUint::one() << 64u32))).floor();
    scaled.to_integer().to_u128().unwrap_or(1u128 << 64)
}
