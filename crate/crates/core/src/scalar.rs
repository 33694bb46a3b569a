use ndarray::NdFloat;
use num_traits::FromPrimitive;
use std::iter::Sum;

/// Floating-point element type the whole crate is generic over.
pub trait Scalar: NdFloat + FromPrimitive + Sum + Default {
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in `f32`, so this never fails for the implemented types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
