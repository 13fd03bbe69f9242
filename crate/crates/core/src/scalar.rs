//! Scalar abstraction for the numeric core.

use num_traits::Float;
use std::fmt::{Debug, Display};

/// Floating-point scalar the tensor/graph machinery is generic over.
///
/// `f64` is used for training and all gradient checks; `f32` trades
/// precision for speed at inference time.
pub trait Scalar: Float + Debug + Display + Default + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
