//! Scalar abstraction the numerical core is generic over.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar for all mesh and operator arithmetic.
///
/// Blanket-implemented for anything float-like; in practice `f32` and `f64`.
/// The tolerances quoted throughout the crate are calibrated for `f64`;
/// an `f32` instantiation compiles and runs but only meets loose bounds.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Panics on values outside the target range,
    /// which cannot happen for the finite literals used internally.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant converts to scalar")
    }

    /// Lossy view as `f64`, for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_index(n: usize) -> Self {
        Self::from_usize(n).expect("index converts to scalar")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Send
        + Sync
        + 'static
{
}
