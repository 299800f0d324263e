//! Exact rational arithmetic.
//!
//! Every measure, capital, and probability in this library is an
//! arbitrary-precision rational. Floating point never appears on a
//! correctness path.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PermLabError, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator (both guaranteed by the backing `BigRational`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        ExactRational(BigRational::from_integer(n))
    }

    /// `num/den`. Panics if `den == 0`; library call sites only pass
    /// literal nonzero denominators.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactRational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big_ratio(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(PermLabError::InvalidArgument("zero denominator".into()));
        }
        Ok(ExactRational(BigRational::new(num, den)))
    }

    /// 2^exp as an exact rational; `exp` may be negative.
    pub fn pow2(exp: i32) -> Self {
        let one = BigInt::one();
        if exp >= 0 {
            ExactRational(BigRational::from_integer(one << exp as usize))
        } else {
            ExactRational(BigRational::new(one.clone(), one << (-exp) as usize))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(PermLabError::InvalidArgument(
                "reciprocal of zero".into(),
            ));
        }
        Ok(ExactRational(self.0.recip()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for ExactRational {
    type Err = PermLabError;

    /// Parses `"p"` or `"p/q"` with optional leading `-`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num)
            .map_err(|e| PermLabError::Parse(format!("bad rational {s:?}: {e}")))?;
        let den = BigInt::from_str(den)
            .map_err(|e| PermLabError::Parse(format!("bad rational {s:?}: {e}")))?;
        ExactRational::from_big_ratio(num, den)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<u64> for ExactRational {
    fn from(n: u64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }
}

impl From<BigUint> for ExactRational {
    fn from(n: BigUint) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational(self.0.$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: ExactRational) -> ExactRational {
        assert!(!rhs.is_zero(), "division by zero");
        ExactRational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a ExactRational> for &'a ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: &'a ExactRational) -> ExactRational {
        assert!(!rhs.is_zero(), "division by zero");
        ExactRational(&self.0 / &rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl AddAssign for ExactRational {
    fn add_assign(&mut self, rhs: ExactRational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for ExactRational {
    fn sub_assign(&mut self, rhs: ExactRational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for ExactRational {
    fn mul_assign(&mut self, rhs: ExactRational) {
        self.0 *= rhs.0;
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_display() {
        let r = ExactRational::ratio(26, 48);
        assert_eq!(r.to_string(), "13/24");
        assert_eq!(r, "13/24".parse::<ExactRational>().unwrap());
        assert_eq!(ExactRational::ratio(-4, -8).to_string(), "1/2");
        assert_eq!(ExactRational::from_int(7).to_string(), "7");
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(ExactRational::pow2(3), ExactRational::from_int(8));
        assert_eq!(ExactRational::pow2(-3), ExactRational::ratio(1, 8));
        assert_eq!(ExactRational::pow2(0), ExactRational::one());
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = ExactRational::ratio(1, 3);
        let b = ExactRational::ratio(1, 6);
        assert_eq!(&a + &b, ExactRational::ratio(1, 2));
        assert_eq!(&a - &b, b);
        assert_eq!(&a * &b, ExactRational::ratio(1, 18));
        assert_eq!(&a / &b, ExactRational::from_int(2));
    }

    #[test]
    fn parse_rejects_zero_denominator() {
        assert!("1/0".parse::<ExactRational>().is_err());
    }
}
