use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_dim, Activation, Dataset, WeightVector};
use crate::scalar::Scalar;

/// Counts indexed by (actual class, predicted class), classes in ascending
/// label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix<T> {
    pub labels: Vec<T>,
    pub counts: Vec<Vec<u64>>,
}

impl<T: Scalar> ConfusionMatrix<T> {
    /// An all-zero matrix over `labels` (sorted and deduplicated here).
    pub fn new(labels: &[T]) -> Result<Self> {
        let labels = sorted_unique(labels)?;
        let k = labels.len();
        Ok(Self {
            labels,
            counts: vec![vec![0; k]; k],
        })
    }

    /// Builds a matrix from explicit counts; `labels` must already be
    /// ascending and the grid square.
    pub fn from_counts(labels: Vec<T>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if sorted_unique(&labels)? != labels {
            return Err(Error::invalid(
                "confusion labels must be strictly ascending",
            ));
        }
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::invalid(
                "confusion counts must be a square grid over the labels",
            ));
        }
        Ok(Self { labels, counts })
    }

    fn index_of(&self, label: T) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn record(&mut self, actual: T, predicted: T) -> Result<()> {
        let (i, j) = (self.index_of(actual)?, self.index_of(predicted)?);
        self.counts[i][j] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Trace over total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }
}

fn sorted_unique<T: Scalar>(labels: &[T]) -> Result<Vec<T>> {
    if labels.is_empty() {
        return Err(Error::invalid("at least one class label is required"));
    }
    if labels.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("class labels"));
    }
    let mut v = labels.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    Ok(v)
}

/// The label nearest to the network output; an exact tie goes to the
/// smaller label.
pub fn classify<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    x: &[T],
    class_labels: &[T],
) -> Result<T> {
    check_dim(w.dim(), x.len())?;
    let out = a.apply(w.pre_activation(x));
    if !out.is_finite() {
        return Err(Error::NonFinite("network output"));
    }
    nearest_label(out, class_labels)
}

pub(crate) fn nearest_label<T: Scalar>(out: T, class_labels: &[T]) -> Result<T> {
    let mut best: Option<(T, T)> = None;
    for &c in class_labels {
        let d = (out - c).abs();
        best = match best {
            Some((bc, bd)) if bd < d || (bd == d && bc <= c) => Some((bc, bd)),
            _ => Some((c, d)),
        };
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| Error::invalid("at least one class label is required"))
}

/// Classifies every sample of `test` against `class_labels`.
pub fn evaluate<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    test: &Dataset<T>,
    class_labels: &[T],
) -> Result<ConfusionMatrix<T>> {
    test.ensure_nonempty()?;
    check_dim(w.dim(), test.n())?;
    let mut cm = ConfusionMatrix::new(class_labels)?;
    for s in test.samples() {
        let predicted = classify(w, a, s.features(), &cm.labels)?;
        cm.record(s.target(), predicted)?;
    }
    Ok(cm)
}
