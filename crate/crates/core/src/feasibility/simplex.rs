//! Dense phase-1 simplex.
//!
//! Every finite bound becomes an equality row with its own slack:
//! `u − s = lower` or `u + s = upper`, where `u = w₀ + ⟨c, w⟩`. Rows are
//! signed so the right-hand side is nonnegative; rows whose slack then has
//! coefficient `+1` start with the slack basic, all others get an artificial.
//!
//! The `n + 1` weights are free. Rather than storing both halves of the
//! split `x = x⁺ − x⁻`, each free column carries an orientation flag and is
//! negated in place when the split variable of the opposite sign enters.
//! Since the two halves are exact negatives of each other this is the same
//! iteration sequence as the split tableau, including Bland's ordering
//! `x⁺ < x⁻ < slacks < artificials`.

use super::{IntervalConstraint, SolverStats};
use crate::error::{Error, Result};
use crate::model::WeightVector;
use crate::scalar::Scalar;

/// Entering-variable rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Smallest index with a negative reduced cost, throughout.
    Bland,
    /// Most negative reduced cost; switches to Bland's rule after
    /// `DEGENERATE_RUN` consecutive degenerate pivots and back after the
    /// next pivot that decreases the objective.
    #[default]
    DantzigWithBlandFallback,
}

const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    /// Hard cap on pivots; `None` derives one from the tableau size.
    pub max_pivots: Option<usize>,
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tolerance: f64,
    /// Reduced costs above `-cost_tolerance` count as nonnegative.
    pub cost_tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            rule: PivotRule::default(),
            max_pivots: None,
            pivot_tolerance: 1e-9,
            cost_tolerance: 1e-9,
        }
    }
}

pub(super) struct PhaseOneOutcome<T> {
    pub witness: Option<WeightVector<T>>,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, Copy)]
struct RowMeta {
    constraint: usize,
    /// +1 or -1: the factor the natural row was multiplied by.
    sign: i8,
    is_lower: bool,
    slack: usize,
    artificial: Option<usize>,
}

struct Tableau<T> {
    rows: usize,
    cols: usize,
    width: usize,
    free: usize,
    slacks: usize,
    /// `rows × width`, right-hand side in the last column.
    data: Vec<T>,
    /// Reduced costs; last entry is the negated phase-1 objective.
    cost: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Orientation of each free column (+1: `x⁺`, -1: `x⁻`).
    orient: Vec<i8>,
    meta: Vec<RowMeta>,
}

impl<T: Scalar> Tableau<T> {
    fn build(constraints: &[IntervalConstraint<T>], n: usize) -> Self {
        let free = n + 1;
        let mut meta = Vec::new();
        let mut natural_rhs = Vec::new();
        let mut is_lower = Vec::new();
        for (ci, c) in constraints.iter().enumerate() {
            if c.lower.is_finite() {
                meta.push(ci);
                natural_rhs.push(c.lower);
                is_lower.push(true);
            }
            if c.upper.is_finite() {
                meta.push(ci);
                natural_rhs.push(c.upper);
                is_lower.push(false);
            }
        }
        let rows = meta.len();
        let slacks = rows;

        // sign each row so rhs >= 0, preferring a +1 slack when rhs == 0
        let mut signs = Vec::with_capacity(rows);
        let mut n_art = 0;
        for i in 0..rows {
            let sign: i8 = if is_lower[i] {
                if natural_rhs[i] <= T::zero() {
                    -1
                } else {
                    1
                }
            } else if natural_rhs[i] >= T::zero() {
                1
            } else {
                -1
            };
            let slack_coef = if is_lower[i] { -sign } else { sign };
            if slack_coef < 0 {
                n_art += 1;
            }
            signs.push(sign);
        }

        let cols = free + slacks + n_art;
        let width = cols + 1;
        let mut data = vec![T::zero(); rows * width];
        let mut basis = Vec::with_capacity(rows);
        let mut is_basic = vec![false; cols];
        let mut row_meta = Vec::with_capacity(rows);
        let mut next_art = free + slacks;
        for i in 0..rows {
            let sign = signs[i];
            let s = T::from_i8(sign).expect("sign");
            let c = &constraints[meta[i]];
            let row = &mut data[i * width..(i + 1) * width];
            row[0] = s;
            for (dst, &v) in row[1..free].iter_mut().zip(c.coefficients.iter()) {
                *dst = s * v;
            }
            let slack = free + i;
            let slack_coef = if is_lower[i] { -sign } else { sign };
            row[slack] = T::from_i8(slack_coef).expect("sign");
            row[cols] = s * natural_rhs[i];
            let artificial = if slack_coef > 0 {
                basis.push(slack);
                is_basic[slack] = true;
                None
            } else {
                let a = next_art;
                next_art += 1;
                row[a] = T::one();
                basis.push(a);
                is_basic[a] = true;
                Some(a)
            };
            row_meta.push(RowMeta {
                constraint: meta[i],
                sign,
                is_lower: is_lower[i],
                slack,
                artificial,
            });
        }

        // phase-1 reduced costs: c_j - Σ_{artificial rows} a_ij
        let mut cost = vec![T::zero(); width];
        for (i, m) in row_meta.iter().enumerate() {
            if m.artificial.is_some() {
                let row = &data[i * width..(i + 1) * width];
                for (cj, &a) in cost.iter_mut().zip(row) {
                    *cj = *cj - a;
                }
            }
        }
        for m in &row_meta {
            if let Some(a) = m.artificial {
                cost[a] = T::zero();
            }
        }
        // the last entry now holds -Σ rhs of artificial rows, i.e. -objective

        Tableau {
            rows,
            cols,
            width,
            free,
            slacks,
            data,
            cost,
            basis,
            is_basic,
            orient: vec![1; free],
            meta: row_meta,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.free + self.slacks
    }

    /// Position of column `j` (in its current orientation) in the split ordering.
    fn bland_index(&self, j: usize, flipped: bool) -> usize {
        if j < self.free {
            let positive = (self.orient[j] > 0) != flipped;
            if positive {
                j
            } else {
                self.free + j
            }
        } else {
            self.free + j
        }
    }

    /// Improving column under Bland's rule (`bland`) or the largest-|d| rule;
    /// returns `(column, needs_flip)`.
    fn entering(&self, cost_tol: T, bland: bool) -> Option<(usize, bool)> {
        if !bland {
            let mut best: Option<(T, usize, bool)> = None;
            for j in 0..self.cols {
                if self.is_basic[j] || self.is_artificial(j) {
                    continue;
                }
                let d = self.cost[j];
                let (score, flip) = if j < self.free && d > T::zero() {
                    (d, true)
                } else {
                    (-d, false)
                };
                if score > cost_tol && best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, j, flip));
                }
            }
            return best.map(|(_, j, flip)| (j, flip));
        }
        let mut best: Option<(usize, usize, bool)> = None;
        for j in 0..self.cols {
            if self.is_basic[j] || self.is_artificial(j) {
                continue;
            }
            let d = self.cost[j];
            let candidate = if d < -cost_tol {
                Some(false)
            } else if j < self.free && d > cost_tol {
                Some(true)
            } else {
                None
            };
            if let Some(flip) = candidate {
                let idx = self.bland_index(j, flip);
                if best.is_none_or(|(b, _, _)| idx < b) {
                    best = Some((idx, j, flip));
                }
            }
        }
        best.map(|(_, j, flip)| (j, flip))
    }

    fn flip_column(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = &mut self.data[i * self.width + j];
            *v = -*v;
        }
        self.cost[j] = -self.cost[j];
        self.orient[j] = -self.orient[j];
    }

    /// Minimum-ratio row, ties broken by smallest basic index. Rows whose
    /// basic variable is a free weight impose no bound and are skipped.
    fn leaving(&self, col: usize, pivot_tol: T) -> Option<usize> {
        let rhs = self.cols;
        let bounded = |i: usize| self.basis[i] >= self.free;
        let mut min_ratio = T::infinity();
        for i in (0..self.rows).filter(|&i| bounded(i)) {
            let a = self.data[i * self.width + col];
            if a > pivot_tol {
                let r = self.data[i * self.width + rhs].max(T::zero()) / a;
                min_ratio = min_ratio.min(r);
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let tie = min_ratio + T::tol(1e-12) * (T::one() + min_ratio);
        let mut best: Option<(usize, usize)> = None;
        for i in (0..self.rows).filter(|&i| bounded(i)) {
            let a = self.data[i * self.width + col];
            if a > pivot_tol {
                let r = self.data[i * self.width + rhs].max(T::zero()) / a;
                if r <= tie {
                    let idx = self.bland_index(self.basis[i], false);
                    if best.is_none_or(|(b, _)| idx < b) {
                        best = Some((idx, i));
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let inv = T::one() / self.data[row * w + col];
        let mut prow: Vec<T> = self.data[row * w..(row + 1) * w]
            .iter()
            .map(|&v| v * inv)
            .collect();
        prow[col] = T::one();
        let support: Vec<usize> = (0..w).filter(|&j| prow[j] != T::zero()).collect();
        let sparse = 4 * support.len() < w;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let r = &mut self.data[i * w..(i + 1) * w];
            let f = r[col];
            if f != T::zero() {
                if sparse {
                    for &j in &support {
                        r[j] = r[j] - f * prow[j];
                    }
                } else {
                    for (x, &p) in r.iter_mut().zip(&prow) {
                        *x = *x - f * p;
                    }
                }
                r[col] = T::zero();
            }
        }
        let f = self.cost[col];
        if f != T::zero() {
            for &j in &support {
                self.cost[j] = self.cost[j] - f * prow[j];
            }
            self.cost[col] = T::zero();
        }
        self.data[row * w..(row + 1) * w].copy_from_slice(&prow);

        let old = self.basis[row];
        self.is_basic[old] = false;
        self.is_basic[col] = true;
        self.basis[row] = col;
    }

    fn objective(&self) -> T {
        -self.cost[self.cols]
    }

    fn witness_from_tableau(&self) -> WeightVector<T> {
        let mut x = vec![T::zero(); self.free];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.free {
                let s = T::from_i8(self.orient[b]).expect("sign");
                x[b] = s * self.data[i * self.width + self.cols];
            }
        }
        let bias = x[0];
        WeightVector {
            bias,
            weights: x.split_off(1),
        }
    }

    /// Recomputes the basic solution from the original data, `B x_B = b`.
    fn witness_from_basis(&self, constraints: &[IntervalConstraint<T>]) -> Option<WeightVector<T>> {
        let m = self.rows;
        let mut pos = vec![usize::MAX; self.cols];
        for (k, &b) in self.basis.iter().enumerate() {
            pos[b] = k;
        }
        // dense B with an appended rhs column
        let mut mat = vec![T::zero(); m * (m + 1)];
        for (i, meta) in self.meta.iter().enumerate() {
            let s = T::from_i8(meta.sign).expect("sign");
            let c = &constraints[meta.constraint];
            let row = &mut mat[i * (m + 1)..(i + 1) * (m + 1)];
            for j in 0..self.free {
                let k = pos[j];
                if k != usize::MAX {
                    let orig = if j == 0 {
                        T::one()
                    } else {
                        c.coefficients[j - 1]
                    };
                    row[k] = s * orig * T::from_i8(self.orient[j]).expect("sign");
                }
            }
            if pos[meta.slack] != usize::MAX {
                let natural = if meta.is_lower { -T::one() } else { T::one() };
                row[pos[meta.slack]] = s * natural;
            }
            if let Some(a) = meta.artificial {
                if pos[a] != usize::MAX {
                    row[pos[a]] = T::one();
                }
            }
            let bound = if meta.is_lower { c.lower } else { c.upper };
            row[m] = s * bound;
        }
        let sol = solve_dense(&mut mat, m)?;
        let mut x = vec![T::zero(); self.free];
        for (j, xj) in x.iter_mut().enumerate() {
            if pos[j] != usize::MAX {
                *xj = T::from_i8(self.orient[j]).expect("sign") * sol[pos[j]];
            }
        }
        let bias = x[0];
        Some(WeightVector {
            bias,
            weights: x.split_off(1),
        })
    }
}

/// Gaussian elimination with partial pivoting on an `m × (m+1)` augmented matrix.
fn solve_dense<T: Scalar>(mat: &mut [T], m: usize) -> Option<Vec<T>> {
    let w = m + 1;
    for k in 0..m {
        let (p, pmax) =
            (k..m)
                .map(|i| (i, mat[i * w + k].abs()))
                .fold(
                    (k, T::zero()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pmax <= T::epsilon() {
            return None;
        }
        if p != k {
            for j in 0..w {
                mat.swap(k * w + j, p * w + j);
            }
        }
        let inv = T::one() / mat[k * w + k];
        for i in (k + 1)..m {
            let f = mat[i * w + k] * inv;
            if f != T::zero() {
                for j in k..w {
                    mat[i * w + j] = mat[i * w + j] - f * mat[k * w + j];
                }
            }
        }
    }
    let mut x = vec![T::zero(); m];
    for k in (0..m).rev() {
        let mut acc = mat[k * w + m];
        for j in (k + 1)..m {
            acc = acc - mat[k * w + j] * x[j];
        }
        x[k] = acc / mat[k * w + k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub(super) fn phase_one<T: Scalar>(
    constraints: &[IntervalConstraint<T>],
    n: usize,
    feas_tol: T,
    options: &SimplexOptions,
) -> Result<PhaseOneOutcome<T>> {
    let mut t = Tableau::build(constraints, n);
    let pivot_tol = T::tol(options.pivot_tolerance);
    let cost_tol = T::tol(options.cost_tolerance);
    let max_pivots = options.max_pivots.unwrap_or(50 * (t.rows + t.cols) + 1000);

    let mut stats = SolverStats {
        rows: t.rows,
        columns: t.cols,
        ..SolverStats::default()
    };
    let mut degenerate_run = 0;

    while t.objective() > T::zero() {
        let bland = match options.rule {
            PivotRule::Bland => true,
            PivotRule::DantzigWithBlandFallback => degenerate_run >= DEGENERATE_RUN,
        };
        let Some((col, flip)) = t.entering(cost_tol, bland) else {
            break;
        };
        if stats.pivots >= max_pivots {
            return Err(Error::Solver(format!("pivot limit {max_pivots} reached")));
        }
        if flip {
            t.flip_column(col);
        }
        let Some(row) = t.leaving(col, pivot_tol) else {
            return Err(Error::Solver(
                "phase-1 objective unbounded (numerical breakdown)".into(),
            ));
        };
        let before = t.objective();
        t.pivot(row, col);
        stats.pivots += 1;
        if t.objective() >= before {
            stats.degenerate_pivots += 1;
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
    }

    let objective = t.objective();
    stats.phase1_objective = objective.to_f64_lossy();
    if objective > feas_tol {
        return Ok(PhaseOneOutcome {
            witness: None,
            stats,
        });
    }

    let from_tableau = t.witness_from_tableau();
    let witness = match t.witness_from_basis(constraints) {
        Some(refined)
            if refined.is_finite()
                && super::max_violation(constraints, &refined)
                    <= super::max_violation(constraints, &from_tableau) =>
        {
            refined
        }
        _ => from_tableau,
    };
    Ok(PhaseOneOutcome {
        witness: Some(witness),
        stats,
    })
}
