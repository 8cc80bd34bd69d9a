//! Scalar abstractions.
//!
//! The model code only needs ring operations (`+`, `-`, `*`), so the
//! structural identities can be checked in `i64` or exact rationals while
//! simulations run in `f32`/`f64`. Row reduction needs a field with exact
//! zero tests, which in practice means [`num_rational::BigRational`].

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, NumCast, ToPrimitive};

/// Commutative ring with unit: enough for bilinear forms, Jacobians and
/// brackets.
pub trait Ring: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync {
    fn from_i64(v: i64) -> Self;
}

impl Ring for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Ring for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl Ring for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

impl Ring for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Ring for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Ring for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Ring for num_rational::Rational64 {
    fn from_i64(v: i64) -> Self {
        num_rational::Rational64::from_integer(v)
    }
}

/// A field whose zero test is exact. Floating point types deliberately do
/// not implement this: rank decisions in floating point go through the SVD
/// with an explicit tolerance instead.
pub trait ExactField: Ring {}

impl ExactField for BigRational {}
impl ExactField for num_rational::Rational64 {}

/// Floating point scalar used by the simulation code (`f32` or `f64`).
pub trait Real:
    Ring + Float + FromPrimitive + NumCast + ToPrimitive + Copy + Default + std::fmt::Display + 'static
{
    /// Lossy conversion from `f64`; used for constants and random variates.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact rational from a pair of integers.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
