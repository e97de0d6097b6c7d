//! Scalar abstraction for the numeric kernels.

use std::fmt::{Display, LowerExp};
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
///
/// `RealField` powers the nalgebra factorizations (SVD, QR, Cholesky),
/// `Float`/`FromPrimitive` cover elementary functions and literal conversion.
pub trait Scalar: RealField + Float + FromPrimitive + Copy + Sum + Display + LowerExp {}

impl<T> Scalar for T where T: RealField + Float + FromPrimitive + Copy + Sum + Display + LowerExp {}

/// Converts an `f64` literal into the working scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// finite constants used in this crate.
#[inline]
pub fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable in the scalar type")
}
