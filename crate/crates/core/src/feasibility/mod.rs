//! Linear feasibility for systems of two-sided rows
//! `lower <= w₀ + ⟨c, w⟩ <= upper` over free weights.

mod simplex;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Activation, Dataset, WeightVector};
use crate::scalar::Scalar;

pub use simplex::{PivotRule, SimplexOptions};

/// One two-sided row on the affine pre-activation. Either bound may be an
/// infinity; `lower > upper` is accepted and makes the system infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalConstraint<T> {
    pub lower: T,
    pub upper: T,
    pub coefficients: Arc<[T]>,
}

impl<T: Scalar> IntervalConstraint<T> {
    pub fn new(lower: T, upper: T, coefficients: impl Into<Arc<[T]>>) -> Self {
        Self {
            lower,
            upper,
            coefficients: coefficients.into(),
        }
    }

    /// `w₀ + ⟨c, w⟩`.
    pub fn evaluate(&self, w: &WeightVector<T>) -> T {
        w.pre_activation(&self.coefficients)
    }

    /// Amount by which `w` falls outside the row's interval (zero if inside).
    pub fn violation(&self, w: &WeightVector<T>) -> T {
        let v = self.evaluate(w);
        (self.lower - v).max(v - self.upper).max(T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    /// Simplex pivots performed.
    pub pivots: usize,
    /// Pivots that did not move the phase-1 objective.
    pub degenerate_pivots: usize,
    pub rows: usize,
    pub columns: usize,
    /// Sum of artificial variables at termination.
    pub phase1_objective: f64,
    /// Largest row violation of the returned witness (0 when infeasible).
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult<T> {
    pub status: FeasibilityStatus,
    pub witness: Option<WeightVector<T>>,
    pub stats: SolverStats,
}

impl<T> FeasibilityResult<T> {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// Feasibility tolerance `1e-8 · (1 + max |finite bound|)`.
pub fn feasibility_tolerance<T: Scalar>(constraints: &[IntervalConstraint<T>]) -> T {
    let scale = constraints
        .iter()
        .flat_map(|c| [c.lower, c.upper])
        .filter(|b| b.is_finite())
        .fold(T::zero(), |m, b| m.max(b.abs()));
    T::tol(1e-8) * (T::one() + scale)
}

/// Largest violation of `w` over all rows.
pub fn max_violation<T: Scalar>(constraints: &[IntervalConstraint<T>], w: &WeightVector<T>) -> T {
    constraints
        .iter()
        .map(|c| c.violation(w))
        .fold(T::zero(), T::max)
}

/// The sublevel-set system `|yᵢ − σ(uᵢ)| <= level` rewritten through `σ⁻¹`:
/// one row `σ⁻¹(yᵢ − level) <= uᵢ <= σ⁻¹(yᵢ + level)` per sample.
pub fn build_constraints<T: Scalar, A: Activation<T> + ?Sized>(
    z: &Dataset<T>,
    a: &A,
    level: T,
) -> Result<Vec<IntervalConstraint<T>>> {
    if !level.is_finite() {
        return Err(Error::NonFinite("loss level"));
    }
    if level < T::zero() {
        return Err(Error::invalid(format!(
            "loss level must be nonnegative, got {level}"
        )));
    }
    z.ensure_nonempty()?;
    Ok(z.samples()
        .iter()
        .map(|s| IntervalConstraint {
            lower: a.inverse(s.target() - level),
            upper: a.inverse(s.target() + level),
            coefficients: s.shared_features(),
        })
        .collect())
}

/// Decides whether some `(w₀, w) ∈ ℝⁿ⁺¹` satisfies every row and returns a
/// witness if so. Deterministic: phase-1 simplex with Bland's rule.
pub fn solve_feasibility<T: Scalar>(
    constraints: &[IntervalConstraint<T>],
    n: usize,
) -> Result<FeasibilityResult<T>> {
    solve_feasibility_with(constraints, n, &SimplexOptions::default())
}

pub fn solve_feasibility_with<T: Scalar>(
    constraints: &[IntervalConstraint<T>],
    n: usize,
    options: &SimplexOptions,
) -> Result<FeasibilityResult<T>> {
    for (r, c) in constraints.iter().enumerate() {
        if c.coefficients.len() != n {
            return Err(Error::invalid(format!(
                "row {r} has {} coefficients, expected {n}",
                c.coefficients.len()
            )));
        }
        if c.lower.is_nan() || c.upper.is_nan() {
            return Err(Error::NonFinite("constraint bound"));
        }
        if c.coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint coefficients"));
        }
    }

    let infeasible = |stats| FeasibilityResult {
        status: FeasibilityStatus::Infeasible,
        witness: None,
        stats,
    };

    if constraints
        .iter()
        .any(|c| c.lower > c.upper || c.lower == T::infinity() || c.upper == T::neg_infinity())
    {
        return Ok(infeasible(SolverStats::default()));
    }

    let tol = feasibility_tolerance(constraints);
    let outcome = simplex::phase_one(constraints, n, tol, options)?;
    let mut stats = outcome.stats;
    match outcome.witness {
        None => Ok(infeasible(stats)),
        Some(w) => {
            let viol = max_violation(constraints, &w);
            stats.max_violation = viol.to_f64_lossy();
            if viol > tol {
                return Err(Error::Solver(format!(
                    "witness violates a row by {viol:e}, above tolerance {tol:e}"
                )));
            }
            Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                witness: Some(w),
                stats,
            })
        }
    }
}
