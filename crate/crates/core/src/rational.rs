//! Exact rationals with a `"num/den"` string wire format.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `num / den` for counts; `den` must be nonzero.
    pub fn ratio(num: usize, den: usize) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Rational {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn one() -> Rational {
        Rational(BigRational::one())
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

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Floor as `u64`, saturating; negative values map to 0.
    pub fn floor_u64(&self) -> u64 {
        let f = self.floor();
        if f.is_negative() {
            0
        } else {
            f.to_u64().unwrap_or(u64::MAX)
        }
    }

    pub fn recip(&self) -> Rational {
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// True iff `count > self * total`, evaluated in integers.
    pub fn lt_count(&self, count: usize, total: usize) -> bool {
        BigInt::from(count) * self.0.denom() > self.0.numer() * BigInt::from(total)
    }

    /// Smallest integer `t` with `count > self * total  <=>  count >= t`
    /// for nonnegative integer counts.
    pub fn strict_count_threshold(&self, total: usize) -> usize {
        let x = &self.0 * BigRational::from_integer(BigInt::from(total));
        let f = x.floor().to_integer();
        if f.is_negative() {
            0
        } else {
            (f + 1u32).to_usize().unwrap_or(usize::MAX)
        }
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rational> {
        let s = s.trim();
        let bad = || Error::Schema(format!("malformed rational {s:?}"));
        // Digit strings beyond this are not meaningful at window scale and
        // keep bignum parsing cheap on hostile input.
        if s.len() > 256 {
            return Err(bad());
        }
        let parse_int = |t: &str| -> Result<BigInt> {
            let t = t.trim();
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<BigInt>().map_err(|_| bad())
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(Error::Schema(format!("zero denominator in {s:?}")));
                }
                Ok(Rational(BigRational::new(n, d)))
            }
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"num/den\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let r = Rational::new(2, 4);
        assert_eq!(r.to_string(), "1/2");
        assert_eq!(Rational::zero().to_string(), "0/1");
        assert_eq!("3/9".parse::<Rational>().unwrap(), Rational::new(1, 3));
        assert_eq!("-5".parse::<Rational>().unwrap(), Rational::from_integer(-5));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1/".parse::<Rational>().is_err());
        assert!("+1/2".parse::<Rational>().is_err());
        let json = serde_json::to_string(&Rational::new(1, 4)).unwrap();
        assert_eq!(json, "\"1/4\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Rational::new(1, 4));
    }

    #[test]
    fn strict_threshold() {
        // count > (1/2) * 10  <=>  count >= 6
        assert_eq!(Rational::new(1, 2).strict_count_threshold(10), 6);
        // count > (1/3) * 10 = 3.33  <=>  count >= 4
        assert_eq!(Rational::new(1, 3).strict_count_threshold(10), 4);
        assert_eq!(Rational::zero().strict_count_threshold(10), 1);
        assert!(Rational::new(1, 3).lt_count(4, 10));
        assert!(!Rational::new(1, 2).lt_count(5, 10));
    }

    #[test]
    fn floors() {
        assert_eq!(Rational::new(7, 2).floor_u64(), 3);
        assert_eq!(Rational::new(-1, 2).floor_u64(), 0);
        assert_eq!(Rational::new(6, 1).floor_u64(), 6);
    }
}
