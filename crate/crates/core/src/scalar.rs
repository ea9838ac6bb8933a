//! Floating-point scalar abstraction shared by the linear algebra kernels.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point element type: `f32` or `f64`.
///
/// The associated tolerances scale the numerical contracts of the crate to
/// the working precision. The `f64` values are the ones the verification
/// harness is calibrated against.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + LowerExp
    + Display
    + Send
    + Sync
    + 'static
{
    /// Tolerance for orthonormality and rank contracts on caller-supplied bases.
    const CONTRACT_TOL: f64;
    /// How far a cosine may exceed one before it is treated as a contract violation.
    const COS_ROUNDING: f64;

    /// Converts an `f64` literal into the working precision.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const CONTRACT_TOL: f64 = 1e-8;
    const COS_ROUNDING: f64 = 1e-12;
}

impl Scalar for f32 {
    const CONTRACT_TOL: f64 = 1e-3;
    const COS_ROUNDING: f64 = 1e-5;
}
