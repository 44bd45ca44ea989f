//! Exact rational scalars.
//!
//! Every coordinate, slope and offset in the crate is a [`Scalar`]. The type is a
//! thin newtype over `BigRational`, which keeps values normalized (positive
//! denominator, reduced fraction) after every operation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("malformed rational `{0}`")]
    Malformed(String),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num / den`. Panics on a zero denominator; use [`Scalar::checked_ratio`]
    /// for untrusted input.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn checked_ratio(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Scalar(BigRational::new(num, den)))
        }
    }

    pub fn from_big(r: BigRational) -> Self {
        Scalar(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn signum(&self) -> i8 {
        if self.0.is_positive() {
            1
        } else if self.0.is_negative() {
            -1
        } else {
            0
        }
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

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Scalar(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // numerator/denominator too large for a direct conversion
            let n = self.0.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.0.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    /// Closest rational with denominator `2^bits`; used to turn sampled floats
    /// into exact values.
    pub fn from_f64_dyadic(v: f64, bits: u32) -> Self {
        assert!(v.is_finite());
        let scale = (1u64 << bits.min(62)) as f64;
        let n = (v * scale).round();
        let num = BigInt::from(n as i128);
        let den = BigInt::from(1u64 << bits.min(62));
        Scalar(BigRational::new(num, den))
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Scalar) -> Scalar {
        (self + other) / Scalar::from_int(2)
    }

    pub fn min_of<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max_of<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts `p`, `-p` and `p/q` with decimal integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parse_int = |part: &str| -> Result<BigInt, ScalarParseError> {
            let ok = !part.is_empty()
                && part
                    .strip_prefix(['-', '+'])
                    .unwrap_or(part)
                    .chars()
                    .all(|c| c.is_ascii_digit())
                && part.chars().any(|c| c.is_ascii_digit());
            if !ok {
                return Err(ScalarParseError::Malformed(s.to_string()));
            }
            part.parse::<BigInt>()
                .map_err(|_| ScalarParseError::Malformed(s.to_string()))
        };
        match t.split_once('/') {
            None => Ok(Scalar(BigRational::from_integer(parse_int(t)?))),
            Some((n, d)) => {
                let num = parse_int(n)?;
                let den = parse_int(d)?;
                if den.is_zero() {
                    return Err(ScalarParseError::ZeroDenominator(s.to_string()));
                }
                Ok(Scalar(BigRational::new(num, den)))
            }
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_int(v)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                Scalar($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar($tr::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                Scalar($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

/// Compares two scalars; a convenience for sort closures.
pub fn cmp_scalar(a: &Scalar, b: &Scalar) -> Ordering {
    a.cmp(b)
}
