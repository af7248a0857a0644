use super::{check_dim, Activation, Dataset, WeightVector};
use crate::error::Result;
use crate::scalar::Scalar;

fn checked<T: Scalar>(w: &WeightVector<T>, z: &Dataset<T>) -> Result<()> {
    z.ensure_nonempty()?;
    check_dim(z.n(), w.dim())
}

/// Per-sample `|yᵢ − φ(w, xᵢ)|`, in dataset order.
pub fn absolute_deviations<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    z: &Dataset<T>,
) -> Result<Vec<T>> {
    checked(w, z)?;
    Ok(z.samples()
        .iter()
        .map(|s| (s.target() - a.apply(w.pre_activation(s.features()))).abs())
        .collect())
}

/// Max-norm loss: the largest absolute deviation over the dataset.
pub fn uniform_loss<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    z: &Dataset<T>,
) -> Result<T> {
    Ok(absolute_deviations(w, a, z)?
        .into_iter()
        .fold(T::zero(), T::max))
}

/// The same loss written as a maximum of quasiaffine pieces,
/// `maxᵢ max{yᵢ − φ, φ − yᵢ}`.
pub fn uniform_loss_maxrep<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    z: &Dataset<T>,
) -> Result<T> {
    checked(w, z)?;
    Ok(z.samples()
        .iter()
        .map(|s| {
            let phi = a.apply(w.pre_activation(s.features()));
            let y = s.target();
            (y - phi).max(-y + phi)
        })
        .fold(T::neg_infinity(), T::max))
}

/// Sum of squared residuals (no averaging).
pub fn mse_loss<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    z: &Dataset<T>,
) -> Result<T> {
    checked(w, z)?;
    Ok(z.samples()
        .iter()
        .map(|s| {
            let r = s.target() - a.apply(w.pre_activation(s.features()));
            r * r
        })
        .sum())
}
