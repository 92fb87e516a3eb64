//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

/// Floating point scalar the geometry, channel, quadrature and analytic code is written against.
///
/// Implemented for `f32` and `f64`. The Monte Carlo estimators and the file formats are always
/// `f64`; everything below them can be instantiated at either precision.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::ops::AddAssign
    + std::ops::MulAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the two implementors.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
