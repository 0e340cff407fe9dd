//! Gaussian rationals: complex numbers with exact rational real and imaginary parts.
//!
//! Text grammar (used by scenario files and every table this crate prints):
//!
//! ```text
//! RAT    := INT | INT "/" POSINT
//! SCALAR := RAT | RAT ("+" | "-") RAT "i"
//! ```
//!
//! Output is always canonical: lowest terms, positive denominators, and the
//! imaginary part omitted when it is zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `INT` or `INT "/" POSINT`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let fail = |reason: &str| Error::ScalarParse {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let s = text.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num = parse_int(num).ok_or_else(|| fail("malformed integer"))?;
    let den = match den {
        Some(d) => {
            if d.starts_with(['+', '-']) {
                return Err(fail("denominator must be a positive integer"));
            }
            let d = parse_int(d).ok_or_else(|| fail("malformed denominator"))?;
            if d.is_zero() {
                return Err(fail("zero denominator"));
            }
            d
        }
        None => BigInt::one(),
    };
    Ok(BigRational::new(num, den))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// An element of the field Q(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    re: Rational,
    im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(rat(num, den))
    }

    pub fn i() -> Self {
        Self {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// |z|^2, always a nonnegative rational.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            re: &self.re * q,
            im: &self.im * q,
        }
    }
}

impl Ord for GaussianRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl PartialOrd for GaussianRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for GaussianRational {
    fn from(re: Rational) -> Self {
        Self::real(re)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: GaussianRational) -> GaussianRational {
        &self + &rhs
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: GaussianRational) -> GaussianRational {
        &self - &rhs
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussianRational::real(&self.re * &rhs.re);
        }
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: GaussianRational) -> GaussianRational {
        &self * &rhs
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    /// Panics on division by zero, like the rational types underneath.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inv().expect("division by zero");
        self * &inv
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.re))?;
        if !self.im.is_zero() {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{}i", sign, format_rational(&self.im.abs()))?;
        }
        Ok(())
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GaussianRational {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(s)?));
        };
        // The operator joining the two parts is the last '+'/'-' that is not
        // the leading sign of either rational.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && bytes[k - 1] != b'+' && bytes[k - 1] != b'-')
            .ok_or_else(|| Error::ScalarParse {
                input: text.to_string(),
                reason: "imaginary part must follow a real part and a sign".to_string(),
            })?;
        let re = parse_rational(&body[..split])?;
        let mut im = parse_rational(&body[split + 1..])?;
        if bytes[split] == b'-' {
            im = -im;
        }
        Ok(Self { re, im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_grammar_forms() {
        assert_eq!(g("3"), GaussianRational::from_int(3));
        assert_eq!(g("-2/4"), GaussianRational::from_ratio(-1, 2));
        assert_eq!(g("1/2+3/4i"), GaussianRational::new(rat(1, 2), rat(3, 4)));
        assert_eq!(g("0-1/2i"), GaussianRational::new(rat(0, 1), rat(-1, 2)));
        assert_eq!(g("-1+-2i"), GaussianRational::new(int(-1), int(-2)));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "1/0", "1/-2", "i", "1/2i", "abc", "1.5", "1+i", "2/+3"] {
            assert!(bad.parse::<GaussianRational>().is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_output() {
        assert_eq!(g("6/8").to_string(), "3/4");
        assert_eq!(g("0-2/4i").to_string(), "0-1/2i");
        assert_eq!(g("5+0i").to_string(), "5");
        assert_eq!(g("-1/3+1i").to_string(), "-1/3+1i");
    }

    #[test]
    fn field_arithmetic() {
        let a = g("1+2i");
        let b = g("3-1i");
        assert_eq!(&a * &b, g("5+5i"));
        assert_eq!(&(&a / &b) * &b, a);
        assert_eq!(GaussianRational::i().conj(), g("0-1i"));
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn order_is_lexicographic_on_parts() {
        assert!(g("0+5i") < g("1/2"));
        assert!(g("1/2-1i") < g("1/2"));
    }
}
