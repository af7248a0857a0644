use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Scalar;

/// How a training set is cut from a source dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SubsetSpec<T> {
    /// The whole dataset.
    Full,
    /// The whole dataset; the experiment runner exchanges the roles of the
    /// training and test files.
    Swap,
    /// The first `k` samples of each listed class, in file order.
    FirstKPerClass { counts: Vec<(T, usize)> },
    /// `total` samples drawn uniformly without replacement.
    RandomK { total: usize, seed: u64 },
}

/// Builds the subset; selected samples keep their relative file order and
/// share feature storage with `z`.
pub fn build_subset<T: Scalar>(z: &Dataset<T>, spec: &SubsetSpec<T>) -> Result<Dataset<T>> {
    match spec {
        SubsetSpec::Full | SubsetSpec::Swap => Ok(z.clone()),
        SubsetSpec::FirstKPerClass { counts } => {
            let mut picked = Vec::new();
            for &(label, k) in counts {
                let idx: Vec<usize> = z
                    .samples()
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.target() == label)
                    .map(|(i, _)| i)
                    .take(k)
                    .collect();
                if idx.len() < k {
                    return Err(Error::InsufficientSamples {
                        label: label.to_string(),
                        requested: k,
                        available: idx.len(),
                    });
                }
                picked.extend(idx);
            }
            picked.sort_unstable();
            picked.dedup();
            z.select(&picked)
        }
        SubsetSpec::RandomK { total, seed } => {
            if *total > z.len() {
                return Err(Error::invalid(format!(
                    "random subset of {total} requested from {} samples",
                    z.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut picked = rand::seq::index::sample(&mut rng, z.len(), *total).into_vec();
            picked.sort_unstable();
            z.select(&picked)
        }
    }
}
