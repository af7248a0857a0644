use serde::{Deserialize, Serialize};

use crate::bisection::{train_uniform, BisectionConfig};
use crate::error::{Error, Result};
use crate::model::{absolute_deviations, Dataset, WeightVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierRule<T> {
    /// Drop every sample whose deviation is within `t` of the largest one.
    Tolerance(T),
    /// Drop the `k` samples with the largest deviations; ties go to the
    /// earlier sample.
    TopK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierSpec<T> {
    pub rule: OutlierRule<T>,
    /// Permit a tolerance rule to remove every sample instead of failing.
    #[serde(default)]
    pub allow_remove_all: bool,
}

impl<T> OutlierSpec<T> {
    pub fn tolerance(t: T) -> Self {
        Self {
            rule: OutlierRule::Tolerance(t),
            allow_remove_all: false,
        }
    }

    pub fn top_k(k: usize) -> Self {
        Self {
            rule: OutlierRule::TopK(k),
            allow_remove_all: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport<T> {
    /// Weights of the preliminary uniform-loss fit on the full set.
    pub weights: WeightVector<T>,
    /// `|yᵢ − φ(w, xᵢ)|` for every input sample.
    pub deviations: Vec<T>,
    pub max_deviation: T,
    /// Cut-off used by the tolerance rule.
    pub threshold: Option<T>,
    pub removed_indices: Vec<usize>,
    pub kept_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRemoval<T> {
    pub kept: Dataset<T>,
    pub removed: Dataset<T>,
    pub report: OutlierReport<T>,
}

/// Fits the uniform loss on `z`, then drops the samples the fit matches worst.
pub fn remove_outliers<T: Scalar>(
    z: &Dataset<T>,
    cfg: &BisectionConfig<T>,
    spec: &OutlierSpec<T>,
) -> Result<OutlierRemoval<T>> {
    let fit = train_uniform(z, cfg)?.into_converged()?;
    let a = cfg.activation()?;
    let deviations = absolute_deviations(&fit.weights, &a, z)?;
    partition_by_deviation(z, fit.weights, deviations, spec)
}

/// The selection step of [`remove_outliers`] on precomputed deviations.
pub fn partition_by_deviation<T: Scalar>(
    z: &Dataset<T>,
    weights: WeightVector<T>,
    deviations: Vec<T>,
    spec: &OutlierSpec<T>,
) -> Result<OutlierRemoval<T>> {
    if deviations.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: deviations.len(),
        });
    }
    if deviations.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("deviations"));
    }
    let max_deviation = deviations.iter().copied().fold(T::zero(), T::max);

    let (mut removed, threshold) = match spec.rule {
        OutlierRule::Tolerance(t) => {
            if !(t >= T::zero()) || !t.is_finite() {
                return Err(Error::invalid(format!(
                    "outlier tolerance must be nonnegative, got {t}"
                )));
            }
            let cut = max_deviation - t;
            let removed: Vec<usize> = (0..z.len()).filter(|&i| deviations[i] >= cut).collect();
            if removed.len() == z.len() && !spec.allow_remove_all {
                return Err(Error::DegenerateRemoval(z.len()));
            }
            (removed, Some(cut))
        }
        OutlierRule::TopK(k) => {
            if k > z.len() {
                return Err(Error::invalid(format!(
                    "cannot remove {k} of {} samples",
                    z.len()
                )));
            }
            let mut order: Vec<usize> = (0..z.len()).collect();
            order.sort_by(|&i, &j| {
                deviations[j]
                    .partial_cmp(&deviations[i])
                    .unwrap()
                    .then(i.cmp(&j))
            });
            order.truncate(k);
            (order, None)
        }
    };
    removed.sort_unstable();
    let kept_indices: Vec<usize> = (0..z.len())
        .filter(|i| removed.binary_search(i).is_err())
        .collect();

    Ok(OutlierRemoval {
        kept: z.select(&kept_indices)?,
        removed: z.select(&removed)?,
        report: OutlierReport {
            weights,
            deviations,
            max_deviation,
            threshold,
            removed_indices: removed,
            kept_indices,
        },
    })
}
