//! Sum-of-squares baseline: the same single-node network trained by
//! full-batch gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_dim, mse_loss, Activation, Dataset, WeightVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdConfig<T> {
    pub learning_rate: T,
    pub epochs: usize,
    pub init_seed: u64,
    /// Initial weights are drawn uniformly from `[-init_scale, init_scale]`.
    pub init_scale: T,
    /// Train on per-feature standardized inputs; the returned weights are
    /// mapped back so they apply to raw features.
    pub standardize: bool,
}

impl<T: Scalar> Default for GdConfig<T> {
    /// `learning_rate = 0.002` came out of a sweep over {0.001, 0.002, 0.005,
    /// 0.01, 0.02, 0.05, 0.1} on the toy sets in the test suite: the largest
    /// rate that kept the loss monotone on all of them. Raw high-dimensional
    /// data needs a smaller step; see [`safe_learning_rate`].
    fn default() -> Self {
        Self {
            learning_rate: T::lit(0.002),
            epochs: 500,
            init_seed: 0,
            init_scale: T::lit(0.01),
            standardize: false,
        }
    }
}

impl<T: Scalar> GdConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > T::zero()) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.init_scale >= T::zero()) || !self.init_scale.is_finite() {
            return Err(Error::invalid(format!(
                "init_scale must be nonnegative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// `1 / (2 Σᵢ (1 + ‖xᵢ‖²))`: the reciprocal of a bound on the curvature of
/// the sum-of-squares loss when every activation slope is at most 1.
pub fn safe_learning_rate<T: Scalar>(z: &Dataset<T>) -> Result<T> {
    z.ensure_nonempty()?;
    let curvature: T = z
        .samples()
        .iter()
        .map(|s| T::one() + s.features().iter().map(|&v| v * v).sum::<T>())
        .sum();
    Ok(T::one() / (T::lit(2.0) * curvature))
}

/// [`safe_learning_rate`] of the inputs gradient descent actually sees:
/// the standardized copy of `z` when `standardize` is set.
pub fn safe_learning_rate_for<T: Scalar>(z: &Dataset<T>, standardize: bool) -> Result<T> {
    if standardize {
        z.ensure_nonempty()?;
        safe_learning_rate(&Standardizer::fit(z).transform(z)?)
    } else {
        safe_learning_rate(z)
    }
}

/// Gradient of the sum-of-squares loss:
/// `Σᵢ −2 (yᵢ − σ(uᵢ)) σ′(uᵢ) (1, xᵢ)`.
pub fn mse_gradient<T: Scalar, A: Activation<T> + ?Sized>(
    w: &WeightVector<T>,
    a: &A,
    z: &Dataset<T>,
) -> Result<WeightVector<T>> {
    z.ensure_nonempty()?;
    check_dim(z.n(), w.dim())?;
    let mut grad = WeightVector::zeros(z.n());
    let m2 = T::lit(-2.0);
    for s in z.samples() {
        let u = w.pre_activation(s.features());
        let coef = m2 * (s.target() - a.apply(u)) * a.derivative(u);
        if coef == T::zero() {
            continue;
        }
        grad.bias = grad.bias + coef;
        for (g, &x) in grad.weights.iter_mut().zip(s.features()) {
            *g = *g + coef * x;
        }
    }
    Ok(grad)
}

fn initial_weights<T: Scalar>(n: usize, cfg: &GdConfig<T>) -> WeightVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.init_seed);
    let scale = cfg.init_scale.to_f64_lossy();
    let mut draw = || {
        T::lit(if scale > 0.0 {
            rng.random_range(-scale..=scale)
        } else {
            0.0
        })
    };
    let bias = draw();
    let weights = (0..n).map(|_| draw()).collect();
    WeightVector { bias, weights }
}

struct Standardizer<T> {
    mean: Vec<T>,
    std: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    fn fit(z: &Dataset<T>) -> Self {
        let count = T::from_usize(z.len()).expect("dataset size fits scalar");
        let mut mean = vec![T::zero(); z.n()];
        for s in z.samples() {
            for (m, &x) in mean.iter_mut().zip(s.features()) {
                *m = *m + x;
            }
        }
        mean.iter_mut().for_each(|m| *m = *m / count);
        let mut var = vec![T::zero(); z.n()];
        for s in z.samples() {
            for ((v, &x), &m) in var.iter_mut().zip(s.features()).zip(&mean) {
                *v = *v + (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let sd = (v / count).sqrt();
                if sd > T::zero() {
                    sd
                } else {
                    T::one()
                }
            })
            .collect();
        Self { mean, std }
    }

    fn transform(&self, z: &Dataset<T>) -> Result<Dataset<T>> {
        let rows = z
            .samples()
            .iter()
            .map(|s| {
                let x = s
                    .features()
                    .iter()
                    .zip(self.mean.iter().zip(&self.std))
                    .map(|(&v, (&m, &sd))| (v - m) / sd)
                    .collect::<Vec<_>>();
                (x, s.target())
            })
            .collect();
        Dataset::from_rows(rows)
    }

    /// Weights on standardized inputs → weights on raw inputs.
    fn to_raw(&self, w: &WeightVector<T>) -> WeightVector<T> {
        let weights: Vec<T> = w
            .weights
            .iter()
            .zip(&self.std)
            .map(|(&wj, &sd)| wj / sd)
            .collect();
        let shift = weights
            .iter()
            .zip(&self.mean)
            .fold(T::zero(), |acc, (&wj, &m)| acc + wj * m);
        WeightVector {
            bias: w.bias - shift,
            weights,
        }
    }

    /// Weights on raw inputs → weights on standardized inputs.
    fn to_standardized(&self, w: &WeightVector<T>) -> WeightVector<T> {
        let shift = w
            .weights
            .iter()
            .zip(&self.mean)
            .fold(T::zero(), |acc, (&wj, &m)| acc + wj * m);
        WeightVector {
            bias: w.bias + shift,
            weights: w
                .weights
                .iter()
                .zip(&self.std)
                .map(|(&wj, &sd)| wj * sd)
                .collect(),
        }
    }
}

/// Trains and returns the final weights.
pub fn train_mse<T: Scalar, A: Activation<T> + ?Sized>(
    z: &Dataset<T>,
    cfg: &GdConfig<T>,
    a: &A,
) -> Result<WeightVector<T>> {
    train_mse_with_history(z, cfg, a).map(|(w, _)| w)
}

/// Trains and also returns the loss before the first step and after every
/// epoch (`epochs + 1` values).
pub fn train_mse_with_history<T: Scalar, A: Activation<T> + ?Sized>(
    z: &Dataset<T>,
    cfg: &GdConfig<T>,
    a: &A,
) -> Result<(WeightVector<T>, Vec<T>)> {
    cfg.validate()?;
    z.ensure_nonempty()?;

    let scaler = cfg.standardize.then(|| Standardizer::fit(z));
    let scaled;
    let train = match &scaler {
        Some(sc) => {
            scaled = sc.transform(z)?;
            &scaled
        }
        None => z,
    };

    let init = initial_weights(z.n(), cfg);
    let mut w = match &scaler {
        Some(sc) => sc.to_standardized(&init),
        None => init,
    };

    let initial = mse_loss(&w, a, train)?;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    history.push(initial);
    for epoch in 1..=cfg.epochs {
        let g = mse_gradient(&w, a, train)?;
        w.bias = w.bias - cfg.learning_rate * g.bias;
        for (wj, gj) in w.weights.iter_mut().zip(&g.weights) {
            *wj = *wj - cfg.learning_rate * *gj;
        }
        let loss = mse_loss(&w, a, train)?;
        if !loss.is_finite() || loss > T::lit(1e6) * initial {
            return Err(Error::Diverged {
                epoch,
                loss: loss.to_f64_lossy(),
                initial: initial.to_f64_lossy(),
            });
        }
        history.push(loss);
    }

    let w = match &scaler {
        Some(sc) => sc.to_raw(&w),
        None => w,
    };
    Ok((w, history))
}
