//! Coefficient fields: exact rationals for identity checks, `f64` for
//! everything sampled or optimised. Conversion between them is always explicit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn bigint_rational(v: BigInt) -> Rational {
    BigRational::from_integer(v)
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Picks the matching entry of a table that is cached in both modes.
    fn from_cached(exact: &Rational, float: f64) -> Self;
    fn to_float(&self) -> f64;
    /// Used for pivot selection only.
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn from_cached(_exact: &Rational, float: f64) -> Self {
        float
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        rational_int(v)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_cached(exact: &Rational, _float: f64) -> Self {
        exact.clone()
    }

    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            Scalar::to_float(&self.abs()).max(f64::MIN_POSITIVE)
        }
    }
}

/// Exact conversion of a finite `f64` to a rational.
pub fn f64_to_rational(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}
