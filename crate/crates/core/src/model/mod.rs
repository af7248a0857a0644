//! The single-output network without hidden layers: samples, datasets,
//! weights, the forward pass and the two training losses.

mod activation;
mod loss;
mod quasiconvex;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use activation::{Activation, LeakyRelu};
pub use loss::{absolute_deviations, mse_loss, uniform_loss, uniform_loss_maxrep};
pub use quasiconvex::{is_quasiconvex_on_segment, quasiconvex_slack};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One labelled record. Feature storage is shared, so subsets built from a
/// dataset refer to the same vectors as the original.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    features: Arc<[T]>,
    target: T,
}

impl<T: Scalar> Sample<T> {
    pub fn new(features: impl Into<Arc<[T]>>, target: T) -> Result<Self> {
        let features = features.into();
        if !target.is_finite() {
            return Err(Error::NonFinite("sample target"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample features"));
        }
        Ok(Self { features, target })
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn target(&self) -> T {
        self.target
    }

    pub fn shared_features(&self) -> Arc<[T]> {
        Arc::clone(&self.features)
    }

    /// True when both samples point at the same feature buffer.
    pub fn shares_features_with(&self, other: &Sample<T>) -> bool {
        Arc::ptr_eq(&self.features, &other.features)
    }
}

/// An ordered collection of samples of a common feature dimension.
///
/// `class_labels` lists the distinct targets in order of first appearance.
/// An empty dataset is representable (e.g. the "removed" side of an outlier
/// partition that removed nothing) but every training or loss routine
/// rejects it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<Sample<T>>,
    n: usize,
    class_labels: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(n: usize, samples: Vec<Sample<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if let Some(bad) = samples.iter().find(|s| s.features.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.features.len(),
            });
        }
        let mut class_labels: Vec<T> = Vec::new();
        for s in &samples {
            if !class_labels.contains(&s.target) {
                class_labels.push(s.target);
            }
        }
        Ok(Self {
            samples,
            n,
            class_labels,
        })
    }

    /// Builds a dataset from plain rows; `n` is taken from the first row.
    pub fn from_rows(rows: Vec<(Vec<T>, T)>) -> Result<Self> {
        let n = rows
            .first()
            .map(|(x, _)| x.len())
            .ok_or(Error::EmptyDataset)?;
        let samples = rows
            .into_iter()
            .map(|(x, y)| Sample::new(x, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, samples)
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_labels(&self) -> &[T] {
        &self.class_labels
    }

    /// Class labels in ascending order.
    pub fn sorted_labels(&self) -> Vec<T> {
        let mut labels = self.class_labels.clone();
        labels.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
        labels
    }

    pub fn targets(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.target)
    }

    /// Number of samples carrying `label`.
    pub fn count_label(&self, label: T) -> usize {
        self.samples.iter().filter(|s| s.target == label).count()
    }

    /// A new dataset over the samples at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let samples = indices
            .iter()
            .map(|&i| {
                self.samples
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("sample index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, samples)
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

/// Bias `w₀` and input weights `w₁…wₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector<T> {
    pub bias: T,
    pub weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(bias: T, weights: Vec<T>) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weight vector"));
        }
        Ok(Self { bias, weights })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bias: T::zero(),
            weights: vec![T::zero(); n],
        }
    }

    /// Number of input weights (excluding the bias).
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w₀ + ⟨w, x⟩` without a length check.
    #[inline]
    pub fn pre_activation(&self, x: &[T]) -> T {
        self.weights
            .iter()
            .zip(x)
            .fold(self.bias, |acc, (&w, &xi)| acc + w * xi)
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn lerp(&self, other: &Self, lambda: T) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let mu = T::one() - lambda;
        Ok(Self {
            bias: lambda * self.bias + mu * other.bias,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(&a, &b)| lambda * a + mu * b)
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.weights
            .iter()
            .fold(self.bias.abs(), |m, w| m.max(w.abs()))
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// The network output `σ(w₀ + ⟨w, x⟩)`.
pub fn forward<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    x: &[T],
) -> Result<T> {
    check_dim(w.dim(), x.len())?;
    Ok(a.apply(w.pre_activation(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relu() -> LeakyRelu<f64> {
        LeakyRelu::new(0.01).unwrap()
    }

    #[test]
    fn forward_zero_weights_gives_zero() {
        let w = WeightVector::<f64>::zeros(3);
        assert_eq!(forward(&w, &relu(), &[1.0, -2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn forward_identity_on_positive_branch() {
        let w = WeightVector::new(0.0, vec![1.0]).unwrap();
        assert_eq!(forward(&w, &relu(), &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn forward_negative_branch() {
        let w = WeightVector::new(0.5, vec![-1.0]).unwrap();
        let got = forward(&w, &relu(), &[2.0]).unwrap();
        // independent scalar evaluation: u = 0.5 - 2 = -1.5, σ(u) = 0.01 * u
        let u: f64 = 0.5 + (-1.0) * 2.0;
        let expected = if u <= 0.0 { 0.01 * u } else { u };
        assert_eq!(got, expected);
        assert!((got - (-0.015)).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let w = WeightVector::<f64>::zeros(2);
        assert!(matches!(
            forward(&w, &relu(), &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn dataset_validates_rows() {
        let s1 = Sample::new(vec![1.0, 2.0], 1.0).unwrap();
        let s2 = Sample::new(vec![1.0], 2.0).unwrap();
        assert!(Dataset::new(2, vec![s1, s2]).is_err());
        assert!(Sample::new(vec![f64::NAN], 1.0).is_err());
        assert!(Sample::new(vec![1.0], f64::INFINITY).is_err());
    }

    #[test]
    fn class_labels_follow_first_appearance() {
        let z =
            Dataset::from_rows(vec![(vec![0.0], 2.0), (vec![1.0], 1.0), (vec![2.0], 2.0)]).unwrap();
        assert_eq!(z.class_labels(), &[2.0, 1.0]);
        assert_eq!(z.sorted_labels(), vec![1.0, 2.0]);
        assert_eq!(z.count_label(2.0), 2);
    }

    #[test]
    fn select_shares_feature_storage() {
        let z = Dataset::from_rows(vec![(vec![0.0], 0.0), (vec![1.0], 1.0)]).unwrap();
        let sub = z.select(&[1]).unwrap();
        assert!(sub.samples()[0].shares_features_with(&z.samples()[1]));
        assert!(z.select(&[5]).is_err());
    }

    #[test]
    fn weight_vector_rejects_non_finite() {
        assert!(WeightVector::new(f64::NAN, vec![]).is_err());
        assert!(WeightVector::new(0.0, vec![f64::INFINITY]).is_err());
    }
}
