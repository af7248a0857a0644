//! The floating-point abstraction every numeric routine in the crate is written against.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable for weights, features, losses and LP tableaux.
///
/// Implemented for `f32` and `f64`. Tolerances that the solvers derive from
/// decimal constants go through [`Scalar::lit`] and [`Scalar::tol`], so a
/// single generic code path serves both precisions.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// A decimal tolerance, raised to a precision-appropriate floor.
    ///
    /// For `f64` the requested value is returned unchanged for anything at or
    /// above `1e-12`; for `f32` it never drops below `1e3 * f32::EPSILON`.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(1e3);
        Self::lit(x).max(floor)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
