//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same kernels run in `f32` and `f64`. Concrete `f64` aliases live at the
//! crate root; `f64` is the format every shipped tolerance is stated for.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable by all kernels: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
///
/// Panics only if the target type cannot represent any `f64` at all, which
/// does not happen for the supported types.
#[inline]
pub fn real<R: Scalar>(x: f64) -> R {
    R::from_f64(x).expect("scalar conversion from f64")
}

/// Lossy view of a scalar as `f64`, for reports and error payloads.
#[inline]
pub fn approx_f64<R: Scalar>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
