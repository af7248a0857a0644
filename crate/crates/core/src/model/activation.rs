use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A strictly increasing activation with an explicit inverse.
///
/// Training by bisection rewrites `|y - σ(u)| <= L` as
/// `σ⁻¹(y - L) <= u <= σ⁻¹(y + L)`, so every activation used here must be
/// invertible on the whole real line.
pub trait Activation<T: Scalar>: std::fmt::Debug + Send + Sync {
    fn apply(&self, t: T) -> T;

    fn inverse(&self, s: T) -> T;

    /// Derivative used by gradient descent. At a kink, implementations pick
    /// one fixed element of the subdifferential.
    fn derivative(&self, t: T) -> T;

    fn checked_apply(&self, t: T) -> Result<T> {
        if !t.is_finite() {
            return Err(Error::NonFinite("activation input"));
        }
        Ok(self.apply(t))
    }

    fn checked_inverse(&self, s: T) -> Result<T> {
        if !s.is_finite() {
            return Err(Error::NonFinite("inverse activation input"));
        }
        Ok(self.inverse(s))
    }
}

/// Leaky ReLU: `αt` for `t <= 0`, `t` for `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakyRelu<T> {
    alpha: T,
}

impl<T: Scalar> LeakyRelu<T> {
    pub const DEFAULT_ALPHA: f64 = 0.01;

    /// Requires `0 < alpha < 1`. `alpha = 0` is plain ReLU, which has no inverse.
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha <= T::zero() || alpha >= T::one() {
            return Err(Error::invalid(format!(
                "leaky ReLU slope must satisfy 0 < alpha < 1, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
}

impl<T: Scalar> Default for LeakyRelu<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(Self::DEFAULT_ALPHA),
        }
    }
}

impl<T: Scalar> Activation<T> for LeakyRelu<T> {
    #[inline]
    fn apply(&self, t: T) -> T {
        if t <= T::zero() {
            self.alpha * t
        } else {
            t
        }
    }

    #[inline]
    fn inverse(&self, s: T) -> T {
        if s <= T::zero() {
            s / self.alpha
        } else {
            s
        }
    }

    /// Slope 1 at the kink.
    #[inline]
    fn derivative(&self, t: T) -> T {
        if t < T::zero() {
            self.alpha
        } else {
            T::one()
        }
    }
}
