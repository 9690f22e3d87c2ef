//! Weighted lasso by cyclic coordinate descent on the Gram form.
//!
//! Minimizes `‖y − Xβ‖² + λ Σ_k w_k |β_k|` using only `G = XᵀX`, `c = Xᵀy`
//! and `yᵀy`, so training folds can be formed by subtracting Gram blocks.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{dot, Matrix};
use crate::num::abs;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LassoError {
    #[error("coordinate descent did not converge in {sweeps} sweeps (KKT residual {kkt:e})")]
    NonConvergence { sweeps: usize, kkt: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("penalty weights must be positive and finite")]
    InvalidWeights,
    #[error("lambda must be nonnegative and finite, got {0}")]
    InvalidLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_sweeps: usize,
    /// Stop once the largest coefficient change in a sweep drops below this…
    pub tolerance: f64,
    /// …and the KKT residual is below this.
    pub kkt_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_sweeps: 10_000, tolerance: 1e-9, kkt_tolerance: 1e-6 }
    }
}

/// Sufficient statistics of a least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub gram: Matrix,
    pub xty: Vec<f64>,
    pub yty: f64,
    pub rows: usize,
}

impl QuadraticForm {
    pub fn from_data(x: &Matrix, y: &[f64]) -> Result<Self, LassoError> {
        if y.len() != x.rows() {
            return Err(LassoError::DimensionMismatch { expected: x.rows(), found: y.len() });
        }
        let xty = x.t_matvec(y).expect("length checked");
        Ok(Self { gram: x.gram(), xty, yty: dot(y, y), rows: x.rows() })
    }

    /// Statistics of the rows `range` only.
    pub fn from_rows(x: &Matrix, y: &[f64], range: core::ops::Range<usize>) -> Result<Self, LassoError> {
        let sub = Matrix::from_fn(range.len(), x.cols(), |r, c| x[(range.start + r, c)]);
        Self::from_data(&sub, &y[range])
    }

    /// `self − other`, the statistics of the complementary rows.
    pub fn minus(&self, other: &QuadraticForm) -> QuadraticForm {
        QuadraticForm {
            gram: self.gram.sub(&other.gram).expect("same dimension"),
            xty: self.xty.iter().zip(&other.xty).map(|(a, b)| a - b).collect(),
            yty: self.yty - other.yty,
            rows: self.rows - other.rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    /// Residual sum of squares `‖y − Xβ‖²`.
    pub fn rss(&self, beta: &[f64]) -> f64 {
        let gb = self.gram.matvec(beta).expect("dimension");
        (self.yty - 2.0 * dot(beta, &self.xty) + dot(beta, &gb)).max(0.0)
    }

    /// Gradient of the squared-error term, `2(Gβ − c)`.
    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let gb = self.gram.matvec(beta).expect("dimension");
        gb.iter().zip(&self.xty).map(|(g, c)| 2.0 * (g - c)).collect()
    }

    pub fn objective(&self, beta: &[f64], weights: &[f64], lambda: f64) -> f64 {
        self.rss(beta) + lambda * beta.iter().zip(weights).map(|(b, w)| w * abs(*b)).sum::<f64>()
    }
}

/// Largest violation of the lasso optimality conditions at `beta`.
pub fn kkt_residual(q: &QuadraticForm, beta: &[f64], weights: &[f64], lambda: f64) -> f64 {
    let g = q.gradient(beta);
    kkt_from_gradient(&g, beta, weights, lambda)
}

fn kkt_from_gradient(g: &[f64], beta: &[f64], weights: &[f64], lambda: f64) -> f64 {
    g.iter()
        .zip(beta)
        .zip(weights)
        .map(|((&gk, &bk), &wk)| {
            let t = lambda * wk;
            if bk == 0.0 {
                (abs(gk) - t).max(0.0)
            } else {
                abs(gk + t * bk.signum())
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest λ for which `β = 0` is optimal: `max_k 2|c_k| / w_k`.
pub fn shrinkage_bound(q: &QuadraticForm, weights: &[f64]) -> f64 {
    q.xty.iter().zip(weights).map(|(c, w)| 2.0 * abs(*c) / w).fold(0.0, f64::max)
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn solve(
    q: &QuadraticForm,
    weights: &[f64],
    lambda: f64,
    warm_start: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<Vec<f64>, LassoError> {
    let p = q.dim();
    if weights.len() != p {
        return Err(LassoError::DimensionMismatch { expected: p, found: weights.len() });
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(LassoError::InvalidWeights);
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(LassoError::InvalidLambda(lambda));
    }
    let mut beta = match warm_start {
        Some(w) if w.len() == p => w.to_vec(),
        Some(w) => return Err(LassoError::DimensionMismatch { expected: p, found: w.len() }),
        None => vec![0.0; p],
    };
    // gb = Gβ, kept in sync with every coordinate move.
    let mut gb = q.gram.matvec(&beta).expect("dimension");
    let n = p;
    let mut kkt = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let mut max_change: f64 = 0.0;
        for k in 0..n {
            let gkk = q.gram[(k, k)];
            if gkk <= 0.0 {
                if beta[k] != 0.0 {
                    beta[k] = 0.0;
                }
                continue;
            }
            let old = beta[k];
            let partial = q.xty[k] - (gb[k] - gkk * old);
            let new = soft_threshold(partial, 0.5 * lambda * weights[k]) / gkk;
            let delta = new - old;
            if delta != 0.0 {
                beta[k] = new;
                let col = q.gram.row(k);
                for (g, &gk) in gb.iter_mut().zip(col) {
                    *g += gk * delta;
                }
                max_change = max_change.max(abs(delta));
            }
        }
        if max_change < opts.tolerance {
            // Refresh Gβ to shed accumulated rounding before judging optimality.
            gb = q.gram.matvec(&beta).expect("dimension");
            let g: Vec<f64> = gb.iter().zip(&q.xty).map(|(g, c)| 2.0 * (g - c)).collect();
            kkt = kkt_from_gradient(&g, &beta, weights, lambda);
            if kkt <= opts.kkt_tolerance {
                return Ok(beta);
            }
        }
    }
    Err(LassoError::NonConvergence { sweeps: opts.max_sweeps, kkt })
}
