//! Minimizing the uniform loss by bisection on its optimal value.
//!
//! The bracket `[l, u]` starts at `[0, maxᵢ |yᵢ − σ(0)|]`; `w = 0` attains
//! the upper end. Each step solves the linear feasibility problem at the
//! midpoint and keeps the half that still contains the optimum. The bracket
//! is tracked as exact dyadic fractions of `u₀`, so its width after `k`
//! steps is exactly `u₀ / 2ᵏ`.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{build_constraints, solve_feasibility};
use crate::model::{Activation, Dataset, LeakyRelu, WeightVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionConfig<T> {
    /// Stop once `upper − lower < epsilon`.
    pub epsilon: T,
    pub max_iterations: usize,
    /// Leaky ReLU slope.
    pub alpha: T,
}

impl<T: Scalar> Default for BisectionConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(1e-5),
            max_iterations: 200,
            alpha: T::lit(0.01),
        }
    }
}

impl<T: Scalar> BisectionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }

    pub fn activation(&self) -> Result<LeakyRelu<T>> {
        LeakyRelu::new(self.alpha)
    }
}

/// One midpoint test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionStep<T> {
    /// 1-based, so the first midpoint is `L₁ = (l₀ + u₀) / 2`.
    pub iteration: usize,
    pub level: T,
    pub feasible: bool,
    /// Bracket after this step.
    pub lower: T,
    pub upper: T,
    /// `upper − lower`, computed from the exact dyadic bracket.
    pub gap: T,
    pub pivots: usize,
    /// Largest row violation of the witness (0 when infeasible).
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionReport<T> {
    /// Witness of the last feasible midpoint (`w = 0` if none was feasible).
    pub weights: WeightVector<T>,
    /// The level certified by `weights`.
    pub witness_level: T,
    pub lower: T,
    pub upper: T,
    /// `u₀`, the starting upper bound.
    pub initial_upper: T,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<BisectionStep<T>>,
    #[serde(skip)]
    lower_frac: T,
    #[serde(skip)]
    upper_frac: T,
}

impl<T: Scalar> BisectionReport<T> {
    /// Bracket width `u₀ · (upper_frac − lower_frac)`, exact in the dyadic
    /// representation.
    pub fn gap(&self) -> T {
        self.initial_upper * (self.upper_frac - self.lower_frac)
    }

    /// Midpoint of the final bracket.
    pub fn estimate(&self) -> T {
        self.initial_upper * (self.lower_frac + self.upper_frac) / T::lit(2.0)
    }

    pub fn total_pivots(&self) -> usize {
        self.trace.iter().map(|s| s.pivots).sum()
    }

    /// Largest witness violation seen over all feasible midpoints.
    pub fn max_violation(&self) -> f64 {
        self.trace
            .iter()
            .map(|s| s.max_violation)
            .fold(0.0, f64::max)
    }

    /// Turns a non-converged report into an error.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                gap: self.gap().to_f64_lossy(),
            })
        }
    }
}

/// `(0, maxᵢ |yᵢ − σ(0)|)`.
pub fn initial_bounds<T: Scalar, A: Activation<T> + ?Sized>(
    z: &Dataset<T>,
    a: &A,
) -> Result<(T, T)> {
    z.ensure_nonempty()?;
    let s0 = a.apply(T::zero());
    let upper = z.targets().map(|y| (y - s0).abs()).fold(T::zero(), T::max);
    Ok((T::zero(), upper))
}

/// Number of halvings of `u₀` needed before the width drops below `epsilon`.
pub fn required_iterations<T: Scalar>(initial_upper: T, epsilon: T) -> usize {
    let mut gap = initial_upper;
    let half = T::lit(0.5);
    let mut k = 0;
    while gap >= epsilon && k < 10_000 {
        gap = gap * half;
        k += 1;
    }
    k
}

/// Trains with the Leaky ReLU of slope `cfg.alpha`.
pub fn train_uniform<T: Scalar>(
    z: &Dataset<T>,
    cfg: &BisectionConfig<T>,
) -> Result<BisectionReport<T>> {
    let a = cfg.activation()?;
    train_uniform_with(z, cfg, &a)
}

/// Trains with an arbitrary invertible activation; `cfg.alpha` is ignored.
pub fn train_uniform_with<T: Scalar, A: Activation<T> + ?Sized>(
    z: &Dataset<T>,
    cfg: &BisectionConfig<T>,
    a: &A,
) -> Result<BisectionReport<T>> {
    cfg.validate()?;
    let (_, u0) = initial_bounds(z, a)?;

    let needed = required_iterations(u0, cfg.epsilon);
    if needed > cfg.max_iterations {
        warn!(
            "max_iterations = {} is below the {} halvings needed for u0 = {} at epsilon = {}",
            cfg.max_iterations, needed, u0, cfg.epsilon
        );
    }

    let half = T::lit(0.5);
    let mut lower_frac = T::zero();
    let mut upper_frac = T::one();
    let mut width = T::one();
    let mut weights = WeightVector::zeros(z.n());
    let mut witness_level = u0;
    let mut trace = Vec::new();
    let mut converged = true;

    while u0 * width >= cfg.epsilon {
        if trace.len() == cfg.max_iterations {
            converged = false;
            break;
        }
        width = width * half;
        let mid_frac = lower_frac + width;
        let level = u0 * mid_frac;

        let rows = build_constraints(z, a, level)?;
        let result = solve_feasibility(&rows, z.n())?;
        let feasible = result.is_feasible();
        if let Some(w) = result.witness {
            weights = w;
            witness_level = level;
            upper_frac = mid_frac;
        } else {
            lower_frac = mid_frac;
        }
        trace.push(BisectionStep {
            iteration: trace.len() + 1,
            level,
            feasible,
            lower: u0 * lower_frac,
            upper: u0 * upper_frac,
            gap: u0 * (upper_frac - lower_frac),
            pivots: result.stats.pivots,
            max_violation: result.stats.max_violation,
        });
    }

    Ok(BisectionReport {
        weights,
        witness_level,
        lower: u0 * lower_frac,
        upper: u0 * upper_frac,
        initial_upper: u0,
        iterations: trace.len(),
        converged,
        trace,
        lower_frac,
        upper_frac,
    })
}
