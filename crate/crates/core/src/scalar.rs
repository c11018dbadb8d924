//! Numeric traits the model is generic over.
//!
//! Continuous physics (exponentials, square roots, bisection) needs a real
//! floating-point type and is written against [`Scalar`]. Drive-schedule
//! arithmetic only needs field operations, so it is written against the
//! weaker [`Quantity`], which exact rationals also satisfy.

use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Field-like quantity: enough for pulse schedules and energy bookkeeping.
pub trait Quantity: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

impl<T> Quantity for T where T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// Real scalar for the continuous model: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts a literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        // from_f64 is infallible for the float types (it rounds or saturates)
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::nan)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_diff<S: Scalar>(a: S, b: S) -> S {
    let scale = a.abs().max(b.abs());
    if scale == S::zero() {
        S::zero()
    } else {
        (a - b).abs() / scale
    }
}
