//! Exact rational numbers and their textual form.
//!
//! Every probability in the crate is a [`Rat`]. The only accepted textual
//! form is `"a/b"` (or a bare integer `"a"`); decimal floats are refused so
//! that channel descriptions stay exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?} (expected \"a/b\")")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"a/b"` or `"a"` into an exact rational.
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| RatParseError::Malformed(text.to_string()))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| RatParseError::Malformed(text.to_string()))?;
    if den.is_zero() {
        return Err(RatParseError::ZeroDenominator(text.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Canonical `"a/b"` form. Integers are written with denominator 1 so the
/// output shape is uniform.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Exact value of a finite double.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Largest double that is `<= r`.
pub fn rat_to_f64_down(r: &Rat) -> f64 {
    let mut f = r.to_f64().unwrap_or(if r.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    if !f.is_finite() {
        return f;
    }
    while let Some(fr) = rat_from_f64(f) {
        if fr.cmp(r) == Ordering::Greater {
            f = f.next_down();
        } else {
            break;
        }
    }
    f
}

/// Smallest double that is `>= r`.
pub fn rat_to_f64_up(r: &Rat) -> f64 {
    // `+ 0.0` turns a negative zero into a positive one.
    -rat_to_f64_down(&-r) + 0.0
}

/// `floor(a / b)` for `b > 0`.
pub(crate) fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// `ceil(a / b)` for `b > 0`.
pub(crate) fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

pub(crate) fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Sum of a slice of rationals, in index order.
pub fn sum(values: &[Rat]) -> Rat {
    values.iter().fold(Rat::zero(), |acc, v| acc + v)
}

pub mod serde_str {
    //! Serde adapters writing rationals as `"a/b"` strings.
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::super::{format_rat, parse_rat, Rat};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rat(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| parse_rat(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rat("1/4").unwrap(), rat(1, 4));
        assert_eq!(parse_rat(" 6/8 ").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-3/9").unwrap(), rat(-1, 3));
        assert_eq!(parse_rat("1").unwrap(), rat_int(1));
    }

    #[test]
    fn refuses_floats_and_zero_denominators() {
        assert!(matches!(parse_rat("0.25"), Err(RatParseError::Malformed(_))));
        assert!(matches!(parse_rat("1/0"), Err(RatParseError::ZeroDenominator(_))));
        assert!(matches!(parse_rat(""), Err(RatParseError::Empty)));
        assert!(parse_rat("1/2/3").is_err());
    }

    #[test]
    fn format_round_trips() {
        for r in [rat(0, 1), rat(1, 1), rat(-7, 3), rat(5, 32)] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
        assert_eq!(format_rat(&rat(2, 4)), "1/2");
    }

    #[test]
    fn directed_f64_conversion_brackets_value() {
        let third = rat(1, 3);
        let lo = rat_to_f64_down(&third);
        let hi = rat_to_f64_up(&third);
        assert!(rat_from_f64(lo).unwrap() < third);
        assert!(rat_from_f64(hi).unwrap() > third);
        assert_eq!(lo.next_up(), hi);
        let half = rat(1, 2);
        assert_eq!(rat_to_f64_down(&half), 0.5);
        assert_eq!(rat_to_f64_up(&half), 0.5);
    }

    #[test]
    fn integer_division_rounds_in_requested_direction() {
        let b = BigInt::from(4);
        assert_eq!(div_floor(&BigInt::from(-7), &b), BigInt::from(-2));
        assert_eq!(div_ceil(&BigInt::from(-7), &b), BigInt::from(-1));
        assert_eq!(div_ceil(&BigInt::from(7), &b), BigInt::from(2));
    }
}
