use super::WeightVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Additive slack used when testing `f(λa + (1−λ)b) <= max{f(a), f(b)}`.
pub fn quasiconvex_slack<T: Scalar>(bound: T) -> T {
    T::tol(1e-9) * (T::one() + bound.abs())
}

/// Samples the quasiconvexity inequality at `num_lambda` equally spaced
/// points of the segment between `w_a` and `w_b` (endpoints included).
pub fn is_quasiconvex_on_segment<T, F>(
    f: F,
    w_a: &WeightVector<T>,
    w_b: &WeightVector<T>,
    num_lambda: usize,
) -> Result<bool>
where
    T: Scalar,
    F: Fn(&WeightVector<T>) -> T,
{
    super::check_dim(w_a.dim(), w_b.dim())?;
    if num_lambda < 2 {
        return Err(Error::invalid("num_lambda must be at least 2"));
    }
    let bound = f(w_a).max(f(w_b));
    let slack = quasiconvex_slack(bound);
    let steps = T::from_usize(num_lambda - 1).expect("lambda count fits scalar");
    for k in 0..num_lambda {
        let lambda = T::from_usize(k).expect("index fits scalar") / steps;
        let w = w_a.lerp(w_b, lambda)?;
        if f(&w) > bound + slack {
            return Ok(false);
        }
    }
    Ok(true)
}
