//! Exact rationals as `"p/q"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{invalid, Result};

/// Formats `q` as `"p/q"` in lowest terms; integers keep the `/1`.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || invalid(format!("cannot parse rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(digits, den);
    Ok(if neg { -q } else { q })
}

/// Parses a fraction strictly between 0 and 1.
pub fn parse_unit_fraction(s: &str) -> Result<BigRational> {
    let q = parse_rational(s)?;
    if q <= BigRational::zero() || q >= BigRational::one() {
        return Err(invalid(format!("{s} is not in (0, 1)")));
    }
    Ok(q)
}

pub(crate) fn serialize<S: Serializer>(
    q: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<BigRational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(serde::de::Error::custom)
}

pub(crate) mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(
        v: &[BigRational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Shorthand for `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
