//! Real scalar abstraction: every numerical module is generic over the
//! floating-point type through this trait, with `f32` and `f64` provided.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar underlying all complex linear algebra and geometry.
///
/// The associated tolerance functions encode how tightly analytic identities
/// can be expected to hold at the type's precision; the `f64` values are the
/// defaults the rest of the crate is calibrated against.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance for Hermiticity checks (scaled by the largest entry).
    fn herm_tol() -> Self;

    /// Tolerance for frame orthonormality residuals.
    fn ortho_tol() -> Self;

    /// Relative target for adaptive quadrature.
    fn quad_tol() -> Self;
}

impl Real for f64 {
    fn herm_tol() -> Self {
        1e-12
    }
    fn ortho_tol() -> Self {
        1e-10
    }
    fn quad_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn herm_tol() -> Self {
        5e-4
    }
    fn ortho_tol() -> Self {
        1e-3
    }
    fn quad_tol() -> Self {
        1e-6
    }
}

/// Converts an `f64` literal into the generic scalar type.
#[inline]
pub(crate) fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}
