//! High-precision real numbers for the few quantities that are irrational by
//! nature (angles from `arctan`, their sines, Euclidean lengths).
//!
//! Thin wrapper over `astro_float::BigFloat` at a fixed working precision of
//! 320 bits (about 96 decimal digits).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::scalar::Scalar;

pub const PRECISION_BITS: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Hp(BigFloat);

impl Hp {
    pub fn from_i64(v: i64) -> Hp {
        Hp(BigFloat::from_i64(v, PRECISION_BITS))
    }

    pub fn from_f64(v: f64) -> Hp {
        Hp(BigFloat::from_f64(v, PRECISION_BITS))
    }

    pub fn from_scalar(s: &Scalar) -> Hp {
        let parse =
            |t: String| with_consts(|cc| BigFloat::parse(&t, Radix::Dec, PRECISION_BITS, RM, cc));
        let n = parse(s.numer().to_string());
        let d = parse(s.denom().to_string());
        Hp(n.div(&d, PRECISION_BITS, RM))
    }

    pub fn zero() -> Hp {
        Hp::from_i64(0)
    }

    pub fn pi() -> Hp {
        Hp(with_consts(|cc| cc.pi(PRECISION_BITS, RM)))
    }

    pub fn atan(&self) -> Hp {
        Hp(with_consts(|cc| self.0.atan(PRECISION_BITS, RM, cc)))
    }

    pub fn sin(&self) -> Hp {
        Hp(with_consts(|cc| self.0.sin(PRECISION_BITS, RM, cc)))
    }

    pub fn sqrt(&self) -> Hp {
        Hp(self.0.sqrt(PRECISION_BITS, RM))
    }

    pub fn abs(&self) -> Hp {
        Hp(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self <= other` up to a relative guard band `rel` (measured against the
    /// larger magnitude). `None` when the two values are within the band.
    pub fn le_with_guard(&self, other: &Hp, rel: f64) -> Option<bool> {
        let scale = if self.abs() > other.abs() {
            self.abs()
        } else {
            other.abs()
        };
        let band = &scale * &Hp::from_f64(rel);
        let diff = other - self;
        if diff.abs() <= band {
            None
        } else {
            Some(!diff.is_negative())
        }
    }

    /// Decimal rendering with the given number of significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let s =
            with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        // astro-float prints d.ddddde+x; trim the mantissa
        match s.split_once('e') {
            Some((mant, exp)) => {
                let neg = mant.starts_with('-');
                let body: String = mant
                    .trim_start_matches('-')
                    .chars()
                    .take(digits + 1)
                    .collect();
                format!("{}{}e{}", if neg { "-" } else { "" }, body, exp)
            }
            None => s,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(25).parse::<f64>().unwrap_or(f64::NAN)
    }
}

impl PartialEq for Hp {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Hp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(f.precision().unwrap_or(50)))
    }
}

macro_rules! hp_binop {
    ($tr:ident, $method:ident) => {
        impl<'a, 'b> $tr<&'b Hp> for &'a Hp {
            type Output = Hp;
            fn $method(self, rhs: &'b Hp) -> Hp {
                Hp(self.0.$method(&rhs.0, PRECISION_BITS, RM))
            }
        }
        impl $tr<Hp> for Hp {
            type Output = Hp;
            fn $method(self, rhs: Hp) -> Hp {
                Hp(self.0.$method(&rhs.0, PRECISION_BITS, RM))
            }
        }
    };
}

hp_binop!(Add, add);
hp_binop!(Sub, sub);
hp_binop!(Mul, mul);
hp_binop!(Div, div);

impl Neg for &Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(self.0.clone().neg())
    }
}

/// `arctan` of an exact slope.
pub fn angle_of_slope(s: &Scalar) -> Hp {
    Hp::from_scalar(s).atan()
}

/// Euclidean distance between two exact points.
pub fn distance(p: &crate::geometry::Point, q: &crate::geometry::Point) -> Hp {
    Hp::from_scalar(&p.squared_distance(q)).sqrt()
}
