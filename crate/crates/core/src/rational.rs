//! Exact rational arithmetic used for weights, penalties and objectives.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt::Write as _;

/// Exact rational number. Times are integer minutes, so denominators only come
/// from weights and penalty ratios and stay small.
pub type Rational = num_rational::Ratio<i128>;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(value as i128)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses `12`, `-3`, `2.75` or `41/3`.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = parse_integer(num.trim()).ok_or_else(err)?;
        let den: i128 = parse_integer(den.trim()).ok_or_else(err)?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    // 18 fractional digits keeps 10^k well inside i128 together with the whole part.
    if frac.len() > 18 || whole.len() > 18 {
        return Err(err());
    }
    let digits = |part: &str| part.bytes().all(|b| b.is_ascii_digit());
    if !digits(whole) || !digits(frac) {
        return Err(err());
    }
    let whole_value: i128 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| err())? };
    let frac_value: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
    let scale = 10i128.pow(frac.len() as u32);
    let value = Rational::new(whole_value * scale + frac_value, scale);
    Ok(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Option<i128> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.is_empty() || body.len() > 30 || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Exact textual form: an integer, a terminating decimal, or `p/q` when the
/// decimal expansion does not terminate. [`parse`] inverts it.
pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut den = *value.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_even() {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(10i128.pow(places));
    let digits = scaled.to_integer().abs().to_string();
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    let mut out = String::new();
    if value.is_negative() {
        out.push('-');
    }
    let _ = write!(out, "{whole}.{frac}");
    out
}

/// Rounded decimal for human-facing tables.
pub fn format_fixed(value: &Rational, places: usize) -> String {
    let approx = value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(1.0);
    format!("{approx:.places$}")
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub mod serde_str {
    //! Serialize a [`Rational`] as its exact string form.
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}
