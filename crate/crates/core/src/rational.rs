//! Exact rational numbers.
//!
//! Every value, cost, bid, payment and multiplier in the crate is a
//! [`Rational`]. Threshold comparisons (a score exactly equal to zero, an ROI
//! constraint that binds exactly) decide winners, so nothing is ever rounded.
//! [`ExtendedRational`] adds a single `+inf` point used by the cost-multiplier
//! conventions.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational text")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` is neither `p/q` nor a finite decimal")]
    Malformed(String),
}

/// Canonical exact rational: reduced, with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Panics on zero.
    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// Integer power; negative exponents invert. Panics on `0^-k`.
    pub fn pow(&self, exp: i32) -> Self {
        Rational(num::traits::Pow::pow(&self.0, exp))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Rational) -> Self {
        (self + other) / Rational::from_integer(2)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `sig` significant digits, for plotting columns.
    pub fn to_decimal_string(&self, sig: usize) -> String {
        let x = self.to_f64();
        if x == 0.0 || !x.is_finite() {
            return if x == 0.0 { "0".to_string() } else { x.to_string() };
        }
        let exp = x.abs().log10().floor() as i64;
        let decimals = (sig as i64 - 1 - exp).max(0) as usize;
        let mut s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p/q` (signs allowed on either part) or a finite decimal such
    /// as `-0.25`, `3`, `.5`. Decimals convert exactly.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s = text.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if let Some((p, q)) = s.split_once('/') {
            let num = parse_integer(p.trim()).ok_or_else(|| malformed(s))?;
            let den = parse_integer(q.trim()).ok_or_else(|| malformed(s))?;
            if den.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rational(BigRational::new(num, den)));
        }

        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty())
            || !all_digits(int_part)
            || !all_digits(frac_part)
        {
            return Err(malformed(s));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| malformed(s))?
        };
        if negative {
            num = -num;
        }
        let den = num::pow(BigInt::from(10u32), frac_part.len());
        Ok(Rational(BigRational::new(num, den)))
    }
}

fn parse_integer(t: &str) -> Option<BigInt> {
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

fn malformed(s: &str) -> ParseRationalError {
    ParseRationalError::Malformed(s.to_string())
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("rational text (`p/q` or a finite decimal)")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from(BigInt::from(v)))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// A rational or `+inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    Finite(Rational),
    Infinity,
}

impl ExtendedRational {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinity => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinity => None,
        }
    }
}

impl From<Rational> for ExtendedRational {
    fn from(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinity) => Ordering::Less,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Infinity, Infinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(r) => fmt::Display::fmt(r, f),
            ExtendedRational::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtendedRational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtendedRational::Infinity),
            other => other.parse().map(ExtendedRational::Finite),
        }
    }
}

impl Serialize for ExtendedRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtendedRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(q("0.25"), Rational::new(1, 4));
        assert_eq!(q("-1.5"), Rational::new(-3, 2));
        assert_eq!(q(".5"), Rational::new(1, 2));
        assert_eq!(q("7"), Rational::from_integer(7));
        assert_eq!(q("6/4"), Rational::new(3, 2));
        assert_eq!(q("3/-4"), Rational::new(-3, 4));
        assert_eq!(q(" 2/1 "), Rational::from_integer(2));
        assert_eq!(q("3."), Rational::from_integer(3));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!("".parse::<Rational>(), Err(ParseRationalError::Empty));
        assert!(matches!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        for bad in ["abc", "1.2.3", "1e5", ".", "-", "1/", "/2", "1/2/3", "--1", "1/+-2"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn display_is_always_p_over_q() {
        assert_eq!(Rational::one().to_string(), "1/1");
        assert_eq!(Rational::new(-6, 8).to_string(), "-3/4");
        assert_eq!(Rational::zero().to_string(), "0/1");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::new(1, 3).to_decimal_string(12), "0.333333333333");
        assert_eq!(Rational::new(3, 4).to_decimal_string(12), "0.75");
        assert_eq!(Rational::from_integer(1234).to_decimal_string(12), "1234");
        assert_eq!(Rational::zero().to_decimal_string(12), "0");
    }

    #[test]
    fn powers_and_big_values() {
        let delta = Rational::new(1, 16);
        let big = delta.pow(-16);
        assert_eq!(big.to_string(), "18446744073709551616/1");
        assert_eq!(&big * &delta.pow(16), Rational::one());
    }

    #[test]
    fn extended_order() {
        let inf = ExtendedRational::Infinity;
        let two = ExtendedRational::Finite(Rational::from_integer(2));
        assert!(two < inf);
        assert_eq!("inf".parse::<ExtendedRational>().unwrap(), inf);
        assert_eq!(inf.to_string(), "inf");
    }

    #[test]
    fn serde_text_form() {
        let r = Rational::new(5, 3);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"5/3\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let from_decimal: Rational = serde_json::from_str("\"0.125\"").unwrap();
        assert_eq!(from_decimal, Rational::new(1, 8));
    }

    proptest! {
        #[test]
        fn text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = Rational::new(n, d);
            prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
        }

        #[test]
        fn decimal_text_is_exact(int in 0u32..1000, frac in 0u32..10_000) {
            let text = format!("{int}.{frac:04}");
            let expected = Rational::new(int as i64 * 10_000 + frac as i64, 10_000);
            prop_assert_eq!(text.parse::<Rational>().unwrap(), expected);
        }

        #[test]
        fn field_identities(a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            if !y.is_zero() {
                prop_assert_eq!(&(&x * &y) / &y, x.clone());
            }
            prop_assert_eq!(x.midpoint(&y), y.midpoint(&x));
        }
    }
}
