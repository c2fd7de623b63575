//! Exact rational arithmetic and certified interval enclosures.
//!
//! [`Rational`] is an arbitrary-precision fraction kept in canonical form
//! (positive denominator, gcd 1); every operation is exact. [`Enclosure`] is
//! a closed rational interval used to report quantities that are only known
//! up to a certified error, and all enclosure operations are
//! outward-conservative. [`UnitPoint`] is a rational constrained to `[0, 1]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("cannot parse {0:?} as a rational (expected \"p/q\", an integer, or a decimal)")]
    Parse(String),
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("enclosure bounds out of order: lo = {lo} > hi = {hi}")]
    BoundsOutOfOrder { lo: Rational, hi: Rational },
    #[error("widening radius must be nonnegative, got {0}")]
    NegativeRadius(Rational),
    #[error("value {0} lies outside the unit interval")]
    OutsideUnitInterval(Rational),
}

/// An exact rational number in canonical form.
///
/// The denominator is always positive and the fraction fully reduced, so
/// equality and ordering are the mathematical ones. Arithmetic never
/// rounds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact fraction `p/q`. Panics if `q == 0`; the result is reduced and
    /// the sign moved to the numerator.
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_big(p: BigInt, q: BigInt) -> Result<Self, NumericsError> {
        if q.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(p, q)))
    }

    /// Exact power of two, `2^k`, for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        let one = BigInt::one();
        if k >= 0 {
            Rational(BigRational::from_integer(one << (k as usize)))
        } else {
            Rational(BigRational::new(one.clone(), one << ((-k) as usize)))
        }
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Clamp into `[0, 1]`.
    pub fn clamp_unit(self) -> Self {
        if self.is_negative() {
            Rational::zero()
        } else if self > Rational::one() {
            Rational::one()
        } else {
            self
        }
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Nearest fraction with denominator `2^bits` that is `<= self`.
    pub fn dyadic_floor(&self, bits: u32) -> Self {
        let scaled = &self.0 * BigRational::from_integer(BigInt::one() << bits);
        Rational(BigRational::new(scaled.floor().to_integer(), BigInt::one() << bits))
    }

    /// Nearest fraction with denominator `2^bits` that is `>= self`.
    pub fn dyadic_ceil(&self, bits: u32) -> Self {
        let scaled = &self.0 * BigRational::from_integer(BigInt::one() << bits);
        Rational(BigRational::new(scaled.ceil().to_integer(), BigInt::one() << bits))
    }

    /// Decimal rendering with exactly `digits` fractional digits, rounding
    /// half to even. The exact value is never lost: callers that need it
    /// keep the `Rational` itself.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.is_negative();
        let mag = self.abs();
        let pow10 = BigInt::from(10u32).pow(digits as u32);
        let num = mag.numerator() * &pow10;
        let den = mag.denominator().clone();
        let quot = &num / &den;
        let rem = &num % &den;
        let twice = &rem * BigInt::from(2);
        let rounded = match twice.cmp(&den) {
            Ordering::Less => quot,
            Ordering::Greater => quot + 1,
            Ordering::Equal => {
                // Half-way: round to even.
                if (&quot % BigInt::from(2)).is_zero() {
                    quot
                } else {
                    quot + 1
                }
            }
        };
        let int_part = &rounded / &pow10;
        let frac_part = &rounded % &pow10;
        let sign = if neg && !rounded.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac:0>width$}", frac = frac_part.to_string(), width = digits)
        }
    }

    /// Lossy conversion for diagnostics and plot previews only.
    pub fn to_f64(&self) -> f64 {
        let digits = 17usize;
        self.to_decimal(digits).parse().unwrap_or(f64::NAN)
    }

    fn from_decimal_str(s: &str) -> Result<Self, NumericsError> {
        let err = || NumericsError::Parse(s.to_string());
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(pos) => {
                let e: i64 = s[pos + 1..].parse().map_err(|_| err())?;
                (&s[..pos], e)
            }
            None => (s, 0i64),
        };
        let (sign, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_digits, frac_digits) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(err());
        }
        let all: String = format!("{int_digits}{frac_digits}");
        if !all.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = BigInt::parse_bytes(all.as_bytes(), 10).ok_or_else(err)?;
        let scale = frac_digits.len() as i64 - exp;
        let value = if scale >= 0 {
            BigRational::new(digits * sign, BigInt::from(10u32).pow(scale as u32))
        } else {
            BigRational::from_integer(digits * sign * BigInt::from(10u32).pow((-scale) as u32))
        };
        Ok(Rational(value))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = NumericsError;

    /// Accepts `"p/q"`, plain integers `"p"`, and decimal literals such as
    /// `"0.4"` or `"1e-7"`, all parsed exactly.
    fn from_str(s: &str) -> Result<Self, NumericsError> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| NumericsError::Parse(s.to_string()))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| NumericsError::Parse(s.to_string()))?;
            if q.is_zero() {
                return Err(NumericsError::ZeroDenominator);
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        if let Ok(n) = BigInt::from_str(s) {
            return Ok(Rational(BigRational::from_integer(n)));
        }
        Rational::from_decimal_str(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        (&self).div(&rhs)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A rational constrained to the unit interval `[0, 1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct UnitPoint(Rational);

impl UnitPoint {
    pub fn new(value: Rational) -> Result<Self, NumericsError> {
        if value.is_negative() || value > Rational::one() {
            return Err(NumericsError::OutsideUnitInterval(value));
        }
        Ok(UnitPoint(value))
    }

    pub fn zero() -> Self {
        UnitPoint(Rational::zero())
    }

    pub fn one() -> Self {
        UnitPoint(Rational::one())
    }

    pub fn half() -> Self {
        UnitPoint(Rational::new(1, 2))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }
}

impl fmt::Display for UnitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for UnitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for UnitPoint {
    type Err = NumericsError;
    fn from_str(s: &str) -> Result<Self, NumericsError> {
        UnitPoint::new(s.parse()?)
    }
}

/// Outcome of a certified comparison between enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Tristate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tristate::Yes => "yes",
            Tristate::No => "no",
            Tristate::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// A certified closed interval `[lo, hi]` guaranteed to contain the true
/// real value it stands for. All arithmetic on enclosures contains the
/// image of every point of the inputs.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumericsError> {
        if lo > hi {
            return Err(NumericsError::BoundsOutOfOrder { lo, hi });
        }
        Ok(Enclosure { lo, hi })
    }

    /// Degenerate enclosure of a single exact value.
    pub fn point(value: Rational) -> Self {
        Enclosure { lo: value.clone(), hi: value }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) * Rational::new(1, 2)
    }

    pub fn contains(&self, value: &Rational) -> bool {
        &self.lo <= value && value <= &self.hi
    }

    /// `[lo - r, hi + r]`; `r` must be nonnegative.
    pub fn widen(&self, r: &Rational) -> Result<Self, NumericsError> {
        if r.is_negative() {
            return Err(NumericsError::NegativeRadius(r.clone()));
        }
        Ok(Enclosure { lo: &self.lo - r, hi: &self.hi + r })
    }

    /// Widen and then clamp into `[0, 1]`, for enclosures of unit-interval
    /// quantities.
    pub fn widen_unit(&self, r: &Rational) -> Result<Self, NumericsError> {
        Ok(self.widen(r)?.clamp_unit())
    }

    pub fn clamp_unit(self) -> Self {
        Enclosure { lo: self.lo.clamp_unit(), hi: self.hi.clamp_unit() }
    }

    /// Certified strict comparison: `Yes` iff every point of `self` is
    /// below every point of `other`, `No` iff strictly the reverse holds,
    /// `Unknown` when the enclosures overlap.
    pub fn strictly_below(&self, other: &Enclosure) -> Tristate {
        if self.hi < other.lo {
            Tristate::Yes
        } else if other.hi < self.lo {
            Tristate::No
        } else {
            Tristate::Unknown
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure { lo: -&self.hi, hi: -&self.lo }
    }

    /// Scale by an exact rational, flipping the bounds when `k < 0`.
    pub fn scale(&self, k: &Rational) -> Enclosure {
        if k.is_negative() {
            Enclosure { lo: &self.hi * k, hi: &self.lo * k }
        } else {
            Enclosure { lo: &self.lo * k, hi: &self.hi * k }
        }
    }

    pub fn shift(&self, b: &Rational) -> Enclosure {
        Enclosure { lo: &self.lo + b, hi: &self.hi + b }
    }

    /// Image under `x -> 1 - x`.
    pub fn one_minus(&self) -> Enclosure {
        let one = Rational::one();
        Enclosure { lo: &one - &self.hi, hi: &one - &self.lo }
    }

    /// Replace the bounds by dyadic fractions with denominator `2^bits`,
    /// rounding outward. Used to cap denominator growth without ever
    /// shrinking the interval.
    pub fn outward_dyadic(&self, bits: u32) -> Enclosure {
        Enclosure { lo: self.lo.dyadic_floor(bits), hi: self.hi.dyadic_ceil(bits) }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(r("3/4"), Rational::new(3, 4));
        assert_eq!(r("-6/8"), Rational::new(-3, 4));
        assert_eq!(r("7"), Rational::from_integer(7));
        assert_eq!(r("0.4"), Rational::new(2, 5));
        assert_eq!(r("1e-7"), Rational::new(1, 10_000_000));
        assert_eq!(r("2.5e1"), Rational::from_integer(25));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn canonical_form_after_arithmetic() {
        let a = Rational::new(6, 8);
        assert_eq!(a.numerator(), &BigInt::from(3));
        assert_eq!(a.denominator(), &BigInt::from(4));
        let b = &Rational::new(1, 6) + &Rational::new(1, 3);
        assert_eq!(b, Rational::new(1, 2));
        assert_eq!(b.denominator(), &BigInt::from(2));
        assert_eq!((&a - &a), Rational::zero());
    }

    #[test]
    fn display_round_trips() {
        for s in ["3/4", "-3/4", "0", "1", "23/100"] {
            assert_eq!(r(s).to_string(), s);
        }
    }

    #[test]
    fn decimal_rendering_rounds_half_to_even() {
        assert_eq!(r("1/2").to_decimal(0), "0");
        assert_eq!(r("3/2").to_decimal(0), "2");
        assert_eq!(r("1/8").to_decimal(2), "0.12");
        assert_eq!(r("3/8").to_decimal(2), "0.38");
        assert_eq!(r("809017/1000000").to_decimal(6), "0.809017");
        assert_eq!(r("2/3").to_decimal(6), "0.666667");
        assert_eq!(r("-1/8").to_decimal(2), "-0.12");
        assert_eq!(r("5").to_decimal(3), "5.000");
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(Rational::pow2(3), Rational::from_integer(8));
        assert_eq!(Rational::pow2(-3), Rational::new(1, 8));
        assert_eq!(Rational::pow2(0), Rational::one());
    }

    #[test]
    fn unit_point_rejects_out_of_range() {
        assert!(UnitPoint::new(r("-1/10")).is_err());
        assert!(UnitPoint::new(r("11/10")).is_err());
        assert!(UnitPoint::new(r("1")).is_ok());
        assert!(UnitPoint::new(r("0")).is_ok());
    }

    #[test]
    fn widen_examples() {
        let e = Enclosure::point(r("1/2")).widen(&r("1/4")).unwrap();
        assert_eq!(e, Enclosure::new(r("1/4"), r("3/4")).unwrap());

        let id = Enclosure::new(r("0"), r("1")).unwrap().widen(&r("0")).unwrap();
        assert_eq!(id, Enclosure::new(r("0"), r("1")).unwrap());

        let clamped = Enclosure::point(r("7/8")).widen_unit(&r("1/4")).unwrap();
        assert_eq!(clamped, Enclosure::new(r("5/8"), r("1")).unwrap());

        assert!(matches!(
            Enclosure::point(r("1/2")).widen(&r("-1/4")),
            Err(NumericsError::NegativeRadius(_))
        ));
    }

    #[test]
    fn strictly_below_examples() {
        let a = Enclosure::new(r("0"), r("1/4")).unwrap();
        let b = Enclosure::new(r("1/2"), r("3/4")).unwrap();
        assert_eq!(a.strictly_below(&b), Tristate::Yes);
        assert_eq!(b.strictly_below(&a), Tristate::No);
        let c = Enclosure::new(r("0"), r("1/2")).unwrap();
        let d = Enclosure::new(r("1/4"), r("3/4")).unwrap();
        assert_eq!(c.strictly_below(&d), Tristate::Unknown);
    }

    #[test]
    fn enclosure_rejects_reversed_bounds() {
        assert!(Enclosure::new(r("1"), r("0")).is_err());
    }

    #[test]
    fn outward_dyadic_is_outward() {
        let e = Enclosure::new(r("1/3"), r("2/3")).unwrap();
        let d = e.outward_dyadic(4);
        assert!(d.lo <= e.lo && e.hi <= d.hi);
        assert_eq!(d.lo, r("5/16"));
        assert_eq!(d.hi, r("11/16"));
    }

    #[test]
    fn enclosure_json_shape() {
        let e = Enclosure::new(r("1/4"), r("3/4")).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"lo":"1/4","hi":"3/4"}"#);
        let back: Enclosure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Rational>();
        assert_send_sync::<UnitPoint>();
        assert_send_sync::<Enclosure>();
        assert_send_sync::<Tristate>();
    }
}
