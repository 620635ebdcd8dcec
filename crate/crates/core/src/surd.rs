//! Exact real amplitudes of the form `sum_s r_s * sqrt(s)`, with rational `r_s`
//! and distinct squarefree radicands `s`.
//!
//! Closed under addition, rational scaling and multiplication, which covers
//! linear combinations of states whose amplitudes are square roots of Born
//! weights.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Radicands above this bound are rejected; squarefree reduction is trial division.
pub const MAX_RADICAND: u64 = 1 << 40;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Surd {
    terms: BTreeMap<u64, Rational>,
}

/// Splits `x` into `(s, f)` with `x = s^2 * f` and `f` squarefree.
fn squarefree_split(mut x: u64) -> (u64, u64) {
    let (mut s, mut f) = (1u64, 1u64);
    let mut p = 2u64;
    while p * p <= x {
        let mut e = 0;
        while x.is_multiple_of(p) {
            x /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, f * x)
}

impl Surd {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(1, r);
        out
    }

    /// Nonnegative square root of a nonnegative rational.
    pub fn sqrt(q: &Rational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "square root of negative {}",
                rational::format_rational(q)
            )));
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        // sqrt(p/r) = sqrt(p*r) / r
        let too_large = || {
            Error::InvalidArgument(format!(
                "radicand of sqrt({}) exceeds {MAX_RADICAND}",
                rational::format_rational(q)
            ))
        };
        let prod = (q.numer() * q.denom()).to_u64().ok_or_else(too_large)?;
        if prod > MAX_RADICAND {
            return Err(too_large());
        }
        let (s, f) = squarefree_split(prod);
        let coeff = Rational::new(BigInt::from(s), q.denom().clone());
        let mut out = Self::zero();
        out.add_term(f, coeff);
        Ok(out)
    }

    fn add_term(&mut self, radicand: u64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(radicand).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, w: &Rational) -> Self {
        if w.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&s, r)| (s, r * w)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&s, r) in &other.terms {
            out.add_term(s, r.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (&a, ra) in &self.terms {
            for (&b, rb) in &other.terms {
                // a, b squarefree: sqrt(a) sqrt(b) = g sqrt((a/g)(b/g)), g = gcd(a, b)
                let g = a.gcd(&b);
                let rad = (a / g)
                    .checked_mul(b / g)
                    .filter(|&r| r <= MAX_RADICAND)
                    .ok_or_else(|| Error::InvalidArgument("radicand product too large".into()))?;
                out.add_term(rad, ra * rb * rational::from_int(g));
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> Result<Self> {
        self.mul(self)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&s, r)| rational::to_f64(r) * (s as f64).sqrt())
            .sum()
    }

    /// Inverse of the `Display` form.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not an amplitude: {text:?}"));
        let mut out = Self::zero();
        let text = text.trim();
        if text == "0" {
            return Ok(out);
        }
        for term in text.split(" + ") {
            let (coeff, radicand) = match term.split_once("*sqrt(") {
                Some((c, rest)) => {
                    let r = rest.strip_suffix(')').ok_or_else(bad)?;
                    let r: u64 = r.parse().map_err(|_| bad())?;
                    if r <= 1 || squarefree_split(r).0 != 1 {
                        return Err(bad());
                    }
                    (c, r)
                }
                None => (term, 1),
            };
            let coeff = rational::parse_rational(coeff)?;
            if coeff.is_zero() || out.terms.contains_key(&radicand) {
                return Err(bad());
            }
            out.add_term(radicand, coeff);
        }
        Ok(out)
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&s, r)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", rational::format_rational(r))?;
            if !s.is_one() {
                write!(f, "*sqrt({s})")?;
            }
        }
        Ok(())
    }
}
