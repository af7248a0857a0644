//! Reference implementations used as test oracles. Nothing here calls into
//! the crate's loss, constraint or solver code.
#![allow(dead_code)]

use maxnorm::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const ALPHA: f64 = 0.01;

pub fn leaky(t: f64, alpha: f64) -> f64 {
    if t > 0.0 {
        t
    } else {
        alpha * t
    }
}

pub fn leaky_inv(s: f64, alpha: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        s / alpha
    }
}

/// Rows `(features, target)`.
pub type Rows = Vec<(Vec<f64>, f64)>;

pub fn rows_of(z: &Dataset) -> Rows {
    z.samples()
        .iter()
        .map(|s| (s.features().to_vec(), s.target()))
        .collect()
}

/// `w[0]` is the bias.
pub fn pre_activation(w: &[f64], x: &[f64]) -> f64 {
    w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>()
}

pub fn uniform_loss(rows: &Rows, alpha: f64, w: &[f64]) -> f64 {
    rows.iter()
        .map(|(x, y)| (y - leaky(pre_activation(w, x), alpha)).abs())
        .fold(0.0, f64::max)
}

pub fn sum_squares(rows: &Rows, alpha: f64, w: &[f64]) -> f64 {
    rows.iter()
        .map(|(x, y)| (y - leaky(pre_activation(w, x), alpha)).powi(2))
        .sum()
}

/// Central differences of [`sum_squares`] in every coordinate.
pub fn fd_gradient(rows: &Rows, alpha: f64, w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|k| {
            let (mut p, mut m) = (w.to_vec(), w.to_vec());
            p[k] += h;
            m[k] -= h;
            (sum_squares(rows, alpha, &p) - sum_squares(rows, alpha, &m)) / (2.0 * h)
        })
        .collect()
}

/// Random dataset with `len` samples in `n` features: features in [-1, 1],
/// targets from a planted network plus noise, clamped to [-2, 2].
pub fn planted_rows<R: Rng>(rng: &mut R, n: usize, len: usize, noise: f64) -> Rows {
    let w: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..len)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = leaky(pre_activation(&w, &x), ALPHA) + rng.random_range(-noise..=noise);
            (x, y.clamp(-2.0, 2.0))
        })
        .collect()
}

/// Lattice `{-half + k·step : k = 0..=m}` in every coordinate.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub half: f64,
    pub step: f64,
    pub m: i64,
}

impl Lattice {
    pub fn new(half: f64, step: f64) -> Self {
        Self {
            half,
            step,
            m: (2.0 * half / step).round() as i64,
        }
    }

    pub fn coord(&self, k: i64) -> f64 {
        k as f64 * self.step - self.half
    }

    pub fn point(&self, ks: &[i64]) -> Vec<f64> {
        ks.iter().map(|&k| self.coord(k)).collect()
    }

    pub fn nearest(&self, v: f64) -> i64 {
        (((v + self.half) / self.step).round() as i64).clamp(0, self.m)
    }
}

/// Minimum of the uniform loss over every lattice point, by exhaustive
/// enumeration. Only sensible for two weights (one feature).
pub fn grid_minimum_exhaustive(rows: &Rows, alpha: f64, lat: Lattice) -> f64 {
    assert_eq!(rows[0].0.len(), 1);
    let mut best = f64::INFINITY;
    for i in 0..=lat.m {
        for j in 0..=lat.m {
            best = best.min(uniform_loss(rows, alpha, &[lat.coord(i), lat.coord(j)]));
        }
    }
    best
}

/// Minimum of the uniform loss over every lattice point, by branch and bound.
///
/// Over a box with centre `c` and radii `rₖ`, row `i`'s pre-activation stays
/// within `Rᵢ = Σₖ |aᵢₖ| rₖ` of its value at `c` (`aᵢ = (1, xᵢ)`), so since σ is
/// increasing its residual is at least the distance from `yᵢ` to
/// `[σ(uᵢ(c) − Rᵢ), σ(uᵢ(c) + Rᵢ)]`; the largest such distance bounds the loss
/// on the box from below. Boxes whose bound cannot beat the incumbent by more
/// than `slack` are discarded, small boxes are enumerated, and the search is
/// depth first so memory stays proportional to the depth. The result lies in
/// `[m, m + slack]` for the exhaustive lattice minimum `m`.
pub fn grid_minimum(
    rows: &Rows,
    alpha: f64,
    lat: Lattice,
    hint: Option<&[f64]>,
    slack: f64,
) -> f64 {
    let d = rows[0].0.len() + 1;
    let eval = |ks: &[i64]| uniform_loss(rows, alpha, &lat.point(ks));
    let bound_of = |lo: &[i64], hi: &[i64]| {
        let centre: Vec<f64> = (0..d)
            .map(|k| 0.5 * (lat.coord(lo[k]) + lat.coord(hi[k])))
            .collect();
        let radius: Vec<f64> = (0..d)
            .map(|k| 0.5 * (hi[k] - lo[k]) as f64 * lat.step)
            .collect();
        rows.iter()
            .map(|(x, y)| {
                let u = pre_activation(&centre, x);
                let r = radius[0]
                    + x.iter()
                        .zip(&radius[1..])
                        .map(|(p, q)| p.abs() * q)
                        .sum::<f64>();
                let (s_lo, s_hi) = (leaky(u - r, alpha), leaky(u + r, alpha));
                (s_lo - y).max(y - s_hi).max(0.0)
            })
            .fold(0.0, f64::max)
    };

    let mut best = f64::INFINITY;
    if let Some(h) = hint {
        let ks: Vec<i64> = h.iter().map(|&v| lat.nearest(v)).collect();
        best = eval(&ks);
    }
    let mut stack = vec![(vec![0; d], vec![lat.m; d])];
    while let Some((lo, hi)) = stack.pop() {
        // rounding margin on the bound
        if bound_of(&lo, &hi) - 1e-12 >= best - slack {
            continue;
        }
        let widths: Vec<i64> = (0..d).map(|k| hi[k] - lo[k]).collect();
        if widths.iter().all(|&w| w <= 3) {
            let mut ks = lo.clone();
            loop {
                best = best.min(eval(&ks));
                let mut k = 0;
                while k < d {
                    ks[k] += 1;
                    if ks[k] <= hi[k] {
                        break;
                    }
                    ks[k] = lo[k];
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
            continue;
        }
        let split = (0..d)
            .max_by_key(|&k| (widths[k], std::cmp::Reverse(k)))
            .unwrap();
        let mid = (lo[split] + hi[split]) / 2;
        let mut halves: Vec<(Vec<i64>, Vec<i64>)> = [(lo[split], mid), (mid + 1, hi[split])]
            .into_iter()
            .map(|(l, h)| {
                let (mut a, mut b) = (lo.clone(), hi.clone());
                a[split] = l;
                b[split] = h;
                (a, b)
            })
            .collect();
        // explore the more promising half first
        halves.sort_by(|p, q| bound_of(&q.0, &q.1).total_cmp(&bound_of(&p.0, &p.1)));
        stack.extend(halves);
    }
    best
}

/// One row `lower ≤ w₀ + ⟨c, w⟩ ≤ upper` with finite bounds.
#[derive(Debug, Clone)]
pub struct Row {
    pub lower: f64,
    pub upper: f64,
    pub coefficients: Vec<f64>,
}

/// Decides feasibility by vertex enumeration. Restricted to the row space
/// of the system matrix the feasible set is a polytope, so it is nonempty
/// iff one of its vertices is feasible; each vertex solves `rank` linearly
/// independent rows held at one of their bounds.
pub fn feasible_by_vertices(rows: &[Row], tol: f64) -> bool {
    if rows.is_empty() {
        return true;
    }
    let d = rows[0].coefficients.len() + 1;
    let a = DMatrix::from_fn(rows.len(), d, |i, j| {
        if j == 0 {
            1.0
        } else {
            rows[i].coefficients[j - 1]
        }
    });
    let rank = a.clone().svd(false, false).rank(1e-10);
    let holds = |v: &DVector<f64>| {
        rows.iter().enumerate().all(|(i, r)| {
            let u = (a.row(i) * v)[0];
            u >= r.lower - tol && u <= r.upper + tol
        })
    };

    let m = rows.len();
    for subset in 0u32..(1 << m) {
        if subset.count_ones() as usize != rank {
            continue;
        }
        let idx: Vec<usize> = (0..m).filter(|i| subset & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(rank, d, |i, j| a[(idx[i], j)]);
        let gram = &sub * sub.transpose();
        let Some(gram_inv) = gram.clone().try_inverse() else {
            continue;
        };
        if gram.clone().svd(false, false).rank(1e-10) < rank {
            continue;
        }
        for sides in 0u32..(1 << rank) {
            let b = DVector::from_fn(rank, |i, _| {
                let r = &rows[idx[i]];
                if sides & (1 << i) != 0 {
                    r.upper
                } else {
                    r.lower
                }
            });
            let v = sub.transpose() * (&gram_inv * b);
            if holds(&v) {
                return true;
            }
        }
    }
    false
}

/// Smallest integer `k` with `u0 / 2ᵏ < epsilon`, from the logarithm.
pub fn iterations_by_log(u0: f64, epsilon: f64) -> usize {
    if u0 < epsilon {
        0
    } else {
        (u0 / epsilon).log2().ceil() as usize
    }
}
