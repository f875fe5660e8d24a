use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the core math is generic over.
///
/// Satisfied by `f32` and `f64`; the blanket impl picks up anything that
/// provides the same `num_traits` surface.
pub trait Scalar:
    Float + FromPrimitive + AddAssign + SubAssign + MulAssign + DivAssign + Sum + Debug + Display + Default + 'static
{
    /// Lossy conversion from `f64`, for literals and counts.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to any Scalar")
    }

    /// Lossy conversion from `usize`, for averaging over counts.
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("usize converts to any Scalar")
    }

    fn clamp01(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Default
        + 'static
{
}
