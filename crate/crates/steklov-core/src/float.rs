//! Scalar abstraction for the special-function kernels.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Floating-point types accepted by the generic kernels (`f32` and `f64`).
pub trait FloatT:
    'static + Send + Sync + Float + FloatConst + FromPrimitive + Default + Debug + Display + LowerExp
{
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl FloatT for f32 {}
impl FloatT for f64 {}
