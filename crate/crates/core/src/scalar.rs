//! Scalar abstraction shared by the image, matching and shrinkage code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point type usable for pixel intensities and linear algebra.
///
/// Both `f32` and `f64` implement it. The denoiser is usually run in `f32`;
/// `f64` is there for reference computations that need tighter round-off.
pub trait Real:
    nalgebra::RealField
    + Float
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
