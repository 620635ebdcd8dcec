//! Exact rational helpers on top of `num_rational::BigRational`.
//!
//! The canonical text form is `p/q` with `gcd(p, q) = 1` and `q > 0`; integers
//! are written with an explicit `/1`. Parsing also accepts a bare integer.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `p/q` from two machine integers. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int<T: Into<BigInt>>(v: T) -> Rational {
    Rational::from_integer(v.into())
}

pub fn from_biguint(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

/// Parses `p/q`, `-p/q` or a bare integer. Whitespace around the parts is ignored.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let digits = |s: &str| {
        let body = s.strip_prefix('-').unwrap_or(s);
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num) || !digits(den) || den.starts_with('-') {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::InvalidArgument(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `p/q` form; always carries the denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 3 ").unwrap(), ratio(3, 1));
        assert_eq!(parse_rational("-1/3").unwrap(), ratio(-1, 3));
        assert_eq!(format_rational(&ratio(6, 3)), "2/1");
        assert_eq!(format_rational(&ratio(-2, 6)), "-1/3");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a/2", "1/-2", "1.5", "1//2", "/3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [ratio(1, 6), ratio(1, 4), ratio(7, 12)];
        assert_eq!(common_denominator(&v), BigInt::from(12));
    }
}
