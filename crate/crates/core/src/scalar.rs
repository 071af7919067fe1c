//! The floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::{Product, Sum};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar type used by the lattice, loop, Loewner and partition-function code.
///
/// Implemented for `f32` and `f64`. Exact identities are asserted at `f64`;
/// `f32` is supported for throughput experiments with tolerances scaled by
/// [`Scalar::tolerance`].
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Product
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    /// Converts a count or index.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64;

    /// A relative tolerance that is attainable at this precision.
    fn tolerance(requested: f64) -> Self {
        Self::lit(requested.max(64.0 * Self::epsilon().as_f64()))
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform sample in `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    #[inline]
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}
