//! Scalar abstraction shared by the measurement, solver and evaluation code.
//!
//! Routing and differential matrices are integer-valued and are handled with
//! exact integer arithmetic elsewhere. Everything that carries delays
//! (milliseconds) is generic over a floating-point type implementing [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and sampled variates.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an integer matrix entry into the scalar type.
#[inline]
pub(crate) fn entry<T: Real>(value: i8) -> T {
    T::of(f64::from(value))
}
