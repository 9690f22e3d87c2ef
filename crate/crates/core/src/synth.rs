//! Vector-autoregressive series with a known sparse causal structure, used as
//! ground truth for recovery tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::graph::CausalGraph;
use crate::linalg::Matrix;
use crate::mocap::{GaitCycle, MocapError};
use crate::num::{abs, exp, ln};

/// Companion matrices with spectral radius at or above this are rejected.
const RADIUS_LIMIT: f64 = 1.0 - 1e-10;
const SQUARINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("process is not stationary: companion spectral radius {radius}")]
    NonStationary { radius: f64 },
    #[error("invalid process: {0}")]
    InvalidSpec(String),
    #[error("need more than {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("graphs differ in size: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Mocap(#[from] MocapError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarProcess {
    p: usize,
    /// One `p × p` matrix per lag; entry `(i, j)` of lag `k` is the effect of
    /// series `j` at lag `k + 1` on series `i`.
    coeffs: Vec<Matrix>,
    noise_std: f64,
    dims_per_series: usize,
    seed: u64,
}

impl VarProcess {
    pub fn new(coeffs: Vec<Matrix>, noise_std: f64, dims_per_series: usize, seed: u64) -> Result<Self, SynthError> {
        let p = coeffs.first().map(Matrix::rows).ok_or_else(|| SynthError::InvalidSpec("order must be >= 1".into()))?;
        if p == 0 {
            return Err(SynthError::InvalidSpec("need at least one series".into()));
        }
        if coeffs.iter().any(|c| c.rows() != p || c.cols() != p) {
            return Err(SynthError::InvalidSpec(format!("every lag matrix must be {p}x{p}")));
        }
        if coeffs.iter().any(|c| c.as_slice().iter().any(|v| !v.is_finite())) {
            return Err(SynthError::InvalidSpec("non-finite coefficient".into()));
        }
        if !(noise_std > 0.0) || !noise_std.is_finite() {
            return Err(SynthError::InvalidSpec(format!("noise_std must be positive, got {noise_std}")));
        }
        if dims_per_series != 1 && dims_per_series != 3 {
            return Err(SynthError::InvalidSpec(format!("dims_per_series must be 1 or 3, got {dims_per_series}")));
        }
        let proc = Self { p, coeffs, noise_std, dims_per_series, seed };
        let radius = proc.spectral_radius();
        if !(radius < RADIUS_LIMIT) {
            return Err(SynthError::NonStationary { radius });
        }
        Ok(proc)
    }

    /// Chain `0 → 1 → … → p−1` at lag one.
    pub fn chain(p: usize, coefficient: f64, noise_std: f64, dims_per_series: usize, seed: u64) -> Result<Self, SynthError> {
        let c = Matrix::from_fn(p, p, |i, j| if i == j + 1 { coefficient } else { 0.0 });
        Self::new(vec![c], noise_std, dims_per_series, seed)
    }

    /// Independent white-noise series.
    pub fn white_noise(p: usize, noise_std: f64, dims_per_series: usize, seed: u64) -> Result<Self, SynthError> {
        Self::new(vec![Matrix::zeros(p, p)], noise_std, dims_per_series, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    /// Coefficient of series `j` at lag `k` (1-based) on series `i`.
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[k - 1][(i, j)]
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn dims_per_series(&self) -> usize {
        self.dims_per_series
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn companion(&self) -> Matrix {
        let (p, d) = (self.p, self.order());
        Matrix::from_fn(p * d, p * d, |r, c| {
            if r < p {
                self.coeffs[c / p][(r, c % p)]
            } else if c == r - p {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Spectral radius of the companion matrix from `‖A^(2^m)‖^(1/2^m)`,
    /// renormalizing at every squaring so the powers stay representable.
    pub fn spectral_radius(&self) -> f64 {
        let mut a = self.companion();
        let mut log_norm = 0.0;
        let mut scale = 1.0;
        for _ in 0..SQUARINGS {
            let n = a.frobenius_norm();
            if n == 0.0 {
                return 0.0;
            }
            a = a.map(|v| v / n);
            log_norm += scale * ln(n);
            a = a.matmul(&a).expect("square");
            scale *= 0.5;
        }
        let n = a.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        exp(log_norm + scale * ln(n))
    }
}

/// Simulates `x_t = Σ_k C_k x_{t−k} + ε_t` after discarding a burn-in of
/// `10·d` frames. Returns a `(p·dims) × n` matrix; with three dims per series,
/// row `3i + c` is channel `c` of series `i`, each channel with its own noise.
pub fn generate_var(proc: &VarProcess, n: usize) -> Result<Matrix, SynthError> {
    let d = proc.order();
    let burn = 10 * d;
    if n <= burn {
        return Err(SynthError::TooFewFrames { needed: burn, got: n });
    }
    let (p, dims) = (proc.p, proc.dims_per_series);
    let rows = p * dims;
    let total = burn + n;
    let mut rng = ChaCha8Rng::seed_from_u64(proc.seed);
    // Column-major history: frame t occupies x[t*rows..(t+1)*rows].
    let mut x = vec![0.0; total * rows];
    for t in 0..total {
        for i in 0..p {
            for c in 0..dims {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mut v = proc.noise_std * z;
                for k in 1..=d.min(t) {
                    let past = &x[(t - k) * rows..(t - k + 1) * rows];
                    let ck = &proc.coeffs[k - 1];
                    for j in 0..p {
                        let cij = ck[(i, j)];
                        if cij != 0.0 {
                            v += cij * past[j * dims + c];
                        }
                    }
                }
                x[t * rows + i * dims + c] = v;
            }
        }
    }
    Ok(Matrix::from_fn(rows, n, |r, t| x[(burn + t) * rows + r]))
}

/// Series names used when a process is packaged as a cycle.
pub fn series_names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("s{i}")).collect()
}

/// Packages a three-channel simulation as a gait cycle with joints `s0, s1, …`.
pub fn generate_cycle(proc: &VarProcess, n: usize, label: &str) -> Result<GaitCycle, SynthError> {
    if proc.dims_per_series != 3 {
        return Err(SynthError::InvalidSpec("a cycle needs three dims per series".into()));
    }
    let coords = generate_var(proc, n)?;
    Ok(GaitCycle::new(series_names(proc.p), coords, label)?)
}

/// Edge `j → i` wherever some lag has `|C_k(i, j)| > threshold`.
pub fn true_graph(proc: &VarProcess, threshold: f64) -> CausalGraph {
    let p = proc.p;
    let adjacency = Matrix::from_fn(p, p, |j, i| {
        let present = i != j && proc.coeffs.iter().any(|c| abs(c[(i, j)]) > threshold);
        if present {
            1.0
        } else {
            0.0
        }
    });
    CausalGraph::new(series_names(p), adjacency, None).expect("binary, no self-loops")
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoveryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// False positives over all absent off-diagonal edges.
    pub spurious_rate: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Confusion counts over off-diagonal directed edges. An empty estimate has
/// precision 1, and an empty truth has recall 1.
pub fn recovery_metrics(estimated: &CausalGraph, truth: &CausalGraph) -> Result<RecoveryScore, SynthError> {
    let p = truth.num_joints();
    if estimated.num_joints() != p {
        return Err(SynthError::DimensionMismatch(estimated.num_joints(), p));
    }
    let (mut tp, mut fp, mut fn_, mut absent) = (0, 0, 0, 0);
    for r in 0..p {
        for c in 0..p {
            if r == c {
                continue;
            }
            match (estimated.has_edge(r, c), truth.has_edge(r, c)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
            if !truth.has_edge(r, c) {
                absent += 1;
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let spurious_rate = if absent == 0 { 0.0 } else { fp as f64 / absent as f64 };
    Ok(RecoveryScore {
        precision,
        recall,
        f1,
        spurious_rate,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}
