//! Exact rational scalars and their canonical string form.
//!
//! Every file format in the crate stores rationals as `"p/q"` in lowest
//! terms with `q > 1`, or as `"p"` when the denominator is one.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational string")]
    Empty,
    #[error("malformed rational {0:?}: expected \"p\" or \"p/q\" with decimal digits")]
    Syntax(String),
    #[error("rational {0:?} has a zero denominator")]
    ZeroDenominator(String),
    #[error("rational {0:?} is not in canonical form (expected {1:?})")]
    NotCanonical(String, String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_bigint(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// `binom(n, k)` as an exact integer; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Division that reports a zero divisor instead of panicking.
pub fn checked_div(a: &Rational, b: &Rational) -> Option<Rational> {
    if b.is_zero() {
        None
    } else {
        Some(a / b)
    }
}

/// `base^exp` for a possibly negative exponent. `None` for `0^negative`.
pub fn pow_signed(base: &Rational, exp: i64) -> Option<Rational> {
    if exp >= 0 {
        Some(pow(base, exp as u64))
    } else if base.is_zero() {
        None
    } else {
        Some(pow(&base.recip(), exp.unsigned_abs()))
    }
}

pub fn pow(base: &Rational, exp: u64) -> Rational {
    // Powers of a reduced fraction are reduced, so no gcd is needed.
    let e = u32::try_from(exp).expect("exponent fits in u32");
    Rational::new_raw(base.numer().pow(e), base.denom().pow(e))
}

/// The exact value of a finite binary float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Nearest `f64` (infinite when out of range).
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn is_canonical_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

/// Parses the canonical interchange form. Non-canonical spellings such as
/// `"2/4"`, `"3/1"`, `"+1"` or `"-0"` are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (num_str, den_str) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits_ok = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(num_str) || den_str.is_some_and(|d| !digits_ok(d)) {
        return Err(ParseRationalError::Syntax(s.to_string()));
    }
    let num: BigInt = num_str.parse().map_err(|_| ParseRationalError::Syntax(s.to_string()))?;
    let den: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| ParseRationalError::Syntax(s.to_string()))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    let value = Rational::new(num.clone() * sign, den.clone());
    let canonical = format_rational(&value);
    let structurally_canonical = is_canonical_digits(num_str)
        && den_str.is_none_or(|d| is_canonical_digits(d) && d != "1")
        && !(sign < 0 && num.is_zero())
        && num.gcd(&den).is_one();
    if !structurally_canonical || canonical != s {
        return Err(ParseRationalError::NotCanonical(s.to_string(), canonical));
    }
    Ok(value)
}

/// Serde adapters storing rationals as canonical strings.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        for s in ["0", "1", "-1", "3/4", "-7/2", "123456789012345678901234567891/7"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn rejects_non_canonical_and_malformed() {
        assert!(matches!(parse_rational("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        assert!(matches!(parse_rational("2/4"), Err(ParseRationalError::NotCanonical(..))));
        assert!(matches!(parse_rational("3/1"), Err(ParseRationalError::NotCanonical(..))));
        assert!(matches!(parse_rational("-0"), Err(ParseRationalError::NotCanonical(..))));
        assert!(matches!(parse_rational("007"), Err(ParseRationalError::NotCanonical(..))));
        assert!(matches!(parse_rational("+1"), Err(ParseRationalError::Syntax(_))));
        assert!(matches!(parse_rational("1/-2"), Err(ParseRationalError::Syntax(_))));
        assert!(matches!(parse_rational("0.5"), Err(ParseRationalError::Syntax(_))));
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
    }

    #[test]
    fn float_embedding_is_exact() {
        let r = from_f64(0.1).unwrap();
        assert_eq!(to_f64(&r), 0.1);
        assert_eq!(r.denom(), &(BigInt::one() << 55));
        assert!(from_f64(f64::NAN).is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(64, 32).to_string(), "1832624140942590534");
        assert_eq!(binomial(3, 4), BigInt::zero());
    }

    #[test]
    fn signed_powers() {
        assert_eq!(pow_signed(&ratio(2, 3), -2), Some(ratio(9, 4)));
        assert_eq!(pow_signed(&int(0), -1), None);
        assert_eq!(pow(&ratio(-1, 2), 3), ratio(-1, 8));
        assert_eq!(checked_div(&int(1), &int(0)), None);
    }
}
