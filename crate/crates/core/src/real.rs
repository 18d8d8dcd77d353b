//! Scalar abstraction: every numeric routine in this crate is generic over
//! [`Real`], implemented for `f32` and `f64`.
//!
//! Tolerances quoted in the documentation (1e-10, 1e-12, ...) assume `f64`;
//! the `f32` instantiation is provided for memory-bound experiments and meets
//! proportionally looser accuracy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + ScalarOperand
    + Serialize
    + DeserializeOwned
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// One draw from the standard normal distribution.
    ///
    /// Deterministic given the generator state, so seeded streams reproduce
    /// bit-identical samples.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the value is not representable, which cannot happen for the
/// finite literals this crate feeds it.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::from(v).expect("constant representable in the scalar type")
}
