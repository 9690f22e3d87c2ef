//! Distance functions between `p × p` adjacency matrices.
//!
//! Eleven functions grouped by how they are built: elementwise vector norms,
//! induced operator norms, singular-value norms, and a Mahalanobis distance
//! weighted by the dataset's total scatter matrix.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::linalg::{self, Cholesky, LinalgError, Matrix};
use crate::num::{abs, sqrt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrices must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("Jaccard distance undefined: elementwise maximum is zero")]
    JaccardUndefined,
    #[error("Hamming distance needs p >= 2")]
    HammingUndefined,
    #[error("Ky-Fan order {k} outside 1..={p}")]
    KyFanOrder { k: usize, p: usize },
    #[error("singular value iteration failed: {0}")]
    EigenFailure(LinalgError),
    #[error("scatter model requires a non-empty dataset")]
    EmptyDataset,
    #[error("Mahalanobis distance requires a fitted scatter model")]
    MissingScatterModel,
    #[error("regularizer must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("unknown distance function `{0}`")]
    UnknownDistance(String),
}

impl From<LinalgError> for DistanceError {
    fn from(e: LinalgError) -> Self {
        DistanceError::EigenFailure(e)
    }
}

/// Identifies one of the eleven distance functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DistanceId {
    Total,
    Frobenius,
    Max,
    Jaccard,
    Hamming,
    RowSum,
    ColSum,
    Spectral,
    KyFan(usize),
    HilbertSchmidt,
    Mahalanobis,
}

impl DistanceId {
    /// The eleven functions in table order, Ky-Fan at `k = 1`.
    pub const ALL: [DistanceId; 11] = [
        DistanceId::Total,
        DistanceId::Frobenius,
        DistanceId::Max,
        DistanceId::Jaccard,
        DistanceId::Hamming,
        DistanceId::RowSum,
        DistanceId::ColSum,
        DistanceId::Spectral,
        DistanceId::KyFan(1),
        DistanceId::HilbertSchmidt,
        DistanceId::Mahalanobis,
    ];

    /// Whether the function satisfies the metric axioms on real matrices.
    pub fn is_metric(self) -> bool {
        !matches!(self, DistanceId::Jaccard | DistanceId::Hamming)
    }

    pub fn needs_scatter(self) -> bool {
        self == DistanceId::Mahalanobis
    }
}

impl fmt::Display for DistanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceId::Total => f.write_str("total"),
            DistanceId::Frobenius => f.write_str("frobenius"),
            DistanceId::Max => f.write_str("max"),
            DistanceId::Jaccard => f.write_str("jaccard"),
            DistanceId::Hamming => f.write_str("hamming"),
            DistanceId::RowSum => f.write_str("row_sum"),
            DistanceId::ColSum => f.write_str("col_sum"),
            DistanceId::Spectral => f.write_str("spectral"),
            DistanceId::KyFan(k) => write!(f, "kyfan{k}"),
            DistanceId::HilbertSchmidt => f.write_str("hilbert_schmidt"),
            DistanceId::Mahalanobis => f.write_str("mahalanobis"),
        }
    }
}

impl FromStr for DistanceId {
    type Err = DistanceError;

    /// Accepts the display names plus `kyfan(k)`, `kyfan:k` and `kyfan-k`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase().replace('-', "_");
        let id = match lower.as_str() {
            "total" => DistanceId::Total,
            "frobenius" => DistanceId::Frobenius,
            "max" => DistanceId::Max,
            "jaccard" => DistanceId::Jaccard,
            "hamming" => DistanceId::Hamming,
            "row_sum" => DistanceId::RowSum,
            "col_sum" => DistanceId::ColSum,
            "spectral" => DistanceId::Spectral,
            "hilbert_schmidt" => DistanceId::HilbertSchmidt,
            "mahalanobis" => DistanceId::Mahalanobis,
            other => {
                let rest = other
                    .strip_prefix("kyfan")
                    .or_else(|| other.strip_prefix("ky_fan"))
                    .ok_or_else(|| DistanceError::UnknownDistance(s.to_string()))?;
                let digits = rest.trim_start_matches(['(', ':', '_']).trim_end_matches(')');
                let k = digits.parse().map_err(|_| DistanceError::UnknownDistance(s.to_string()))?;
                if k == 0 {
                    return Err(DistanceError::UnknownDistance(s.to_string()));
                }
                DistanceId::KyFan(k)
            }
        };
        Ok(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorNorm {
    Total,
    Frobenius,
    Max,
    Jaccard,
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorNorm {
    RowSum,
    ColSum,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularValueNorm {
    KyFan(usize),
    HilbertSchmidt,
}

fn check_pair(a: &Matrix, b: &Matrix) -> Result<usize, DistanceError> {
    if !a.is_square() {
        return Err(DistanceError::NotSquare(a.rows(), a.cols()));
    }
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(DistanceError::DimensionMismatch(a.rows(), a.cols(), b.rows(), b.cols()));
    }
    Ok(a.rows())
}

fn frobenius(values: impl Iterator<Item = f64>) -> f64 {
    sqrt(values.map(|v| v * v).sum())
}

pub fn vector_norm_distance(a: &Matrix, b: &Matrix, norm: VectorNorm) -> Result<f64, DistanceError> {
    let p = check_pair(a, b)?;
    let pairs = || a.as_slice().iter().zip(b.as_slice());
    let value = match norm {
        VectorNorm::Total => pairs().map(|(x, y)| abs(x - y)).sum(),
        VectorNorm::Frobenius => frobenius(pairs().map(|(x, y)| x - y)),
        VectorNorm::Max => p as f64 * pairs().map(|(x, y)| abs(x - y)).fold(0.0, f64::max),
        VectorNorm::Jaccard => {
            let hi = frobenius(pairs().map(|(x, y)| x.max(*y)));
            if hi == 0.0 {
                return Err(DistanceError::JaccardUndefined);
            }
            frobenius(pairs().map(|(x, y)| x.min(*y))) / hi
        }
        VectorNorm::Hamming => {
            if p < 2 {
                return Err(DistanceError::HammingUndefined);
            }
            let hi = frobenius(pairs().map(|(x, y)| x.max(*y)));
            let lo = frobenius(pairs().map(|(x, y)| x.min(*y)));
            (hi - lo) / (p * (p - 1)) as f64
        }
    };
    Ok(value)
}

pub fn operator_norm_distance(a: &Matrix, b: &Matrix, norm: OperatorNorm) -> Result<f64, DistanceError> {
    let p = check_pair(a, b)?;
    let d = a.sub(b)?;
    let value = match norm {
        OperatorNorm::RowSum => (0..p).map(|r| d.row(r).iter().map(|v| abs(*v)).sum::<f64>()).fold(0.0, f64::max),
        OperatorNorm::ColSum => (0..p).map(|c| (0..p).map(|r| abs(d[(r, c)])).sum::<f64>()).fold(0.0, f64::max),
        OperatorNorm::Spectral => linalg::singular_values(&d)?.first().copied().unwrap_or(0.0),
    };
    Ok(value)
}

/// Norms of the singular values of the elementwise-absolute difference
/// `|A − A′|`.
pub fn singular_value_distance(a: &Matrix, b: &Matrix, norm: SingularValueNorm) -> Result<f64, DistanceError> {
    let p = check_pair(a, b)?;
    if let SingularValueNorm::KyFan(k) = norm {
        if k == 0 || k > p {
            return Err(DistanceError::KyFanOrder { k, p });
        }
    }
    let d = a.zip_with(b, |x, y| abs(x - y))?;
    let sigma = linalg::singular_values(&d)?;
    let value = match norm {
        SingularValueNorm::KyFan(k) => sigma.iter().take(k).sum(),
        SingularValueNorm::HilbertSchmidt => sqrt(sigma.iter().filter(|&&s| s > 0.0).map(|s| s * s).sum()),
    };
    Ok(value)
}

/// Total scatter of a set of vectorized matrices plus a factorization of
/// `Σ_T + γI`.
#[derive(Debug, Clone)]
pub struct ScatterModel {
    pub sigma_t: Matrix,
    pub gamma: f64,
    /// Side length `p` of the matrices the model was fitted on.
    pub dim: usize,
    factor: Cholesky,
}

/// `1e-6 · trace(Σ_T) / p²`, or `1e-6` if the scatter is zero.
pub fn default_gamma(sigma_t: &Matrix) -> f64 {
    let n = sigma_t.rows();
    let trace: f64 = (0..n).map(|i| sigma_t[(i, i)]).sum();
    if trace > 0.0 && n > 0 {
        1e-6 * trace / n as f64
    } else {
        1e-6
    }
}

/// `Σ_s (v_s − v̄)(v_s − v̄)ᵀ` over row-major vectorizations.
pub fn total_scatter(dataset: &[Matrix]) -> Result<Matrix, DistanceError> {
    let first = dataset.first().ok_or(DistanceError::EmptyDataset)?;
    let p = first.rows();
    for m in dataset {
        check_pair(first, m)?;
    }
    let len = p * p;
    let count = dataset.len() as f64;
    let mut mean = alloc::vec![0.0; len];
    for m in dataset {
        for (acc, v) in mean.iter_mut().zip(m.as_slice()) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= count;
    }
    let mut sigma = Matrix::zeros(len, len);
    let mut centered = alloc::vec![0.0; len];
    for m in dataset {
        for ((c, v), mu) in centered.iter_mut().zip(m.as_slice()).zip(&mean) {
            *c = v - mu;
        }
        for i in 0..len {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let row = sigma.row_mut(i);
            for (dst, cj) in row[i..].iter_mut().zip(&centered[i..]) {
                *dst += ci * cj;
            }
        }
    }
    for i in 0..len {
        for j in 0..i {
            sigma[(i, j)] = sigma[(j, i)];
        }
    }
    Ok(sigma)
}

pub fn fit_scatter(dataset: &[Matrix], gamma: f64) -> Result<ScatterModel, DistanceError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(DistanceError::InvalidGamma(gamma));
    }
    let sigma_t = total_scatter(dataset)?;
    let dim = dataset[0].rows();
    let mut reg = sigma_t.clone();
    for i in 0..reg.rows() {
        reg[(i, i)] += gamma;
    }
    let factor = Cholesky::new(&reg)?;
    Ok(ScatterModel { sigma_t, gamma, dim, factor })
}

/// Fits with [`default_gamma`].
pub fn fit_scatter_default(dataset: &[Matrix]) -> Result<ScatterModel, DistanceError> {
    let sigma = total_scatter(dataset)?;
    fit_scatter(dataset, default_gamma(&sigma))
}

impl ScatterModel {
    /// `L⁻¹ vec(m)` where `Σ_T + γI = L Lᵀ`; Euclidean distances between
    /// whitened matrices are Mahalanobis distances.
    pub fn whiten(&self, m: &Matrix) -> Result<Vec<f64>, DistanceError> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(DistanceError::DimensionMismatch(m.rows(), m.cols(), self.dim, self.dim));
        }
        let mut v = m.as_slice().to_vec();
        self.factor.forward_substitute(&mut v);
        Ok(v)
    }
}

/// `sqrt(δᵀ (Σ_T + γI)⁻¹ δ)` with `δ = vec(A) − vec(A′)`.
pub fn mahalanobis_distance(a: &Matrix, b: &Matrix, model: &ScatterModel) -> Result<f64, DistanceError> {
    check_pair(a, b)?;
    let wa = model.whiten(a)?;
    let wb = model.whiten(b)?;
    Ok(frobenius(wa.iter().zip(&wb).map(|(x, y)| x - y)))
}

pub fn distance(a: &Matrix, b: &Matrix, id: DistanceId, model: Option<&ScatterModel>) -> Result<f64, DistanceError> {
    match id {
        DistanceId::Total => vector_norm_distance(a, b, VectorNorm::Total),
        DistanceId::Frobenius => vector_norm_distance(a, b, VectorNorm::Frobenius),
        DistanceId::Max => vector_norm_distance(a, b, VectorNorm::Max),
        DistanceId::Jaccard => vector_norm_distance(a, b, VectorNorm::Jaccard),
        DistanceId::Hamming => vector_norm_distance(a, b, VectorNorm::Hamming),
        DistanceId::RowSum => operator_norm_distance(a, b, OperatorNorm::RowSum),
        DistanceId::ColSum => operator_norm_distance(a, b, OperatorNorm::ColSum),
        DistanceId::Spectral => operator_norm_distance(a, b, OperatorNorm::Spectral),
        DistanceId::KyFan(k) => singular_value_distance(a, b, SingularValueNorm::KyFan(k)),
        DistanceId::HilbertSchmidt => singular_value_distance(a, b, SingularValueNorm::HilbertSchmidt),
        DistanceId::Mahalanobis => mahalanobis_distance(a, b, model.ok_or(DistanceError::MissingScatterModel)?),
    }
}
