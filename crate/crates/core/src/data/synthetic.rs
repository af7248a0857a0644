use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{Dataset, Sample};
use crate::scalar::Scalar;

/// Gaussian clusters in `ℝⁿ`, one per `(label, count)` entry.
///
/// Cluster centres sit on a line through the origin along a random unit
/// direction, consecutive centres `separation` apart; every coordinate gets
/// independent `N(0, noise²)` jitter. Records come out shuffled so that the
/// classes are interleaved as in a real archive file. Equal seeds give
/// identical datasets.
pub fn generate_synthetic<T: Scalar>(
    n: usize,
    counts: &[(T, usize)],
    separation: T,
    noise: T,
    seed: u64,
) -> Result<Dataset<T>> {
    if n == 0 {
        return Err(Error::invalid("feature dimension must be at least 1"));
    }
    if counts.is_empty() {
        return Err(Error::invalid("at least one class is required"));
    }
    for (i, &(label, _)) in counts.iter().enumerate() {
        if !label.is_finite() {
            return Err(Error::NonFinite("class label"));
        }
        if counts[..i].iter().any(|&(l, _)| l == label) {
            return Err(Error::invalid(format!("class label {label} listed twice")));
        }
    }
    for (name, v) in [("separation", separation), ("noise", noise)] {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "{name} must be finite and nonnegative, got {v}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> T { T::lit(StandardNormal.sample(&mut rng)) };

    let mut direction: Vec<T> = (0..n).map(|_| normal()).collect();
    let norm = direction.iter().map(|&d| d * d).sum::<T>().sqrt();
    if norm > T::zero() {
        direction.iter_mut().for_each(|d| *d = *d / norm);
    } else {
        direction[0] = T::one();
    }

    let mid = T::lit((counts.len() - 1) as f64 / 2.0);
    let mut samples = Vec::new();
    for (c, &(label, count)) in counts.iter().enumerate() {
        let offset = (T::lit(c as f64) - mid) * separation;
        for _ in 0..count {
            let x: Vec<T> = direction
                .iter()
                .map(|&d| offset * d + noise * normal())
                .collect();
            samples.push(Sample::new(x, label)?);
        }
    }
    samples.shuffle(&mut rng);
    Dataset::new(n, samples)
}
