//! Graphical Granger model on 3D joint trajectories.
//!
//! For each target joint `i` the next-frame coordinates are regressed on the
//! lagged coordinates of every joint through one shared design matrix whose
//! rows interleave the x, y and z channels. The regression uses an adaptive
//! lasso penalty with one weight per joint block, the weight being the inverse
//! total norm of an initial least-squares estimate. Joint `j` is a Granger
//! cause of `i` when any of its lag coefficients survives the penalty.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::graph::{CausalGraph, GraphError};
use crate::lasso::{self, LassoError, QuadraticForm, SolverOptions};
use crate::linalg::{Cholesky, Matrix};
use crate::mocap::GaitCycle;
use crate::num::{abs, ln, pow, sqrt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrangerError {
    #[error("lag {lag} must be at least 1 and below the cycle length {frames}")]
    LagTooLarge { lag: usize, frames: usize },
    #[error("joint `{0}` not in cycle")]
    UnknownJoint(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{folds} folds requested but only {points} prediction time points")]
    TooFewTimePoints { folds: usize, points: usize },
    #[error("residual sum of squares is zero, information criteria undefined")]
    ZeroResidual,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Lasso(#[from] LassoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl GrangerError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, GrangerError::Lasso(LassoError::NonConvergence { .. }) | GrangerError::ZeroResidual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Penalty {
    AdaptiveLasso,
    PlainLasso,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GgmConfig {
    pub lag: usize,
    pub lambda_max: f64,
    pub cv_folds: usize,
    pub lambda_grid_size: usize,
    /// Coefficients with magnitude at or below this count as zero.
    pub zero_threshold: f64,
    /// Lower bound on the initial block norm used for weights.
    pub weight_floor: f64,
    pub penalty: Penalty,
    pub max_sweeps: usize,
    pub tolerance: f64,
}

impl Default for GgmConfig {
    fn default() -> Self {
        Self {
            lag: 1,
            lambda_max: 5.0,
            cv_folds: 5,
            lambda_grid_size: 20,
            zero_threshold: 1e-8,
            weight_floor: 1e-8,
            penalty: Penalty::AdaptiveLasso,
            max_sweeps: 10_000,
            tolerance: 1e-9,
        }
    }
}

impl GgmConfig {
    pub fn validate(&self) -> Result<(), GrangerError> {
        if self.lag < 1 {
            return Err(GrangerError::InvalidConfig("lag must be at least 1"));
        }
        if !(self.lambda_max > 0.0) || !self.lambda_max.is_finite() {
            return Err(GrangerError::InvalidConfig("lambda_max must be positive"));
        }
        if self.cv_folds < 2 {
            return Err(GrangerError::InvalidConfig("cv_folds must be at least 2"));
        }
        if self.lambda_grid_size < 1 {
            return Err(GrangerError::InvalidConfig("lambda grid needs at least one point"));
        }
        if !(self.zero_threshold > 0.0) || !(self.weight_floor > 0.0) || !(self.tolerance > 0.0) {
            return Err(GrangerError::InvalidConfig("thresholds must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(GrangerError::InvalidConfig("max_sweeps must be positive"));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions { max_sweeps: self.max_sweeps, tolerance: self.tolerance, ..SolverOptions::default() }
    }
}

/// Candidate penalties: `lambda_grid_size` points log-spaced over
/// `[λ_max·10⁻³, λ_max]`, largest first.
pub fn lambda_grid(config: &GgmConfig) -> Vec<f64> {
    let g = config.lambda_grid_size;
    if g == 1 {
        return vec![config.lambda_max];
    }
    (0..g).map(|i| config.lambda_max * pow(10.0, -3.0 * i as f64 / (g - 1) as f64)).collect()
}

/// Lagged design matrix: `channels·(n−d)` rows, `p·d` columns.
///
/// Row `channels·(t−d) + c` holds channel `c` at prediction frame `t`; the
/// block of joint `j` holds its values at frames `t−1, …, t−d` in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub values: Matrix,
    pub lag: usize,
    pub joints: Vec<String>,
    pub channels: usize,
}

impl DesignMatrix {
    /// Wraps an arbitrary matrix as a design with `values.cols() / lag` blocks.
    pub fn from_matrix(values: Matrix, lag: usize, joints: Vec<String>, channels: usize) -> Result<Self, GrangerError> {
        if lag == 0 || channels == 0 {
            return Err(GrangerError::InvalidConfig("lag and channels must be positive"));
        }
        if values.cols() != lag * joints.len() {
            return Err(GrangerError::DimensionMismatch { expected: lag * joints.len(), found: values.cols() });
        }
        if values.rows() % channels != 0 {
            return Err(GrangerError::DimensionMismatch { expected: channels, found: values.rows() % channels });
        }
        Ok(Self { values, lag, joints, channels })
    }

    pub fn num_blocks(&self) -> usize {
        self.joints.len()
    }

    pub fn block_range(&self, joint: usize) -> Range<usize> {
        joint * self.lag..(joint + 1) * self.lag
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    /// Per-column weights expanded from per-block weights.
    pub fn expand_block_weights(&self, weights: &[f64]) -> Result<Vec<f64>, GrangerError> {
        if weights.len() != self.num_blocks() {
            return Err(GrangerError::DimensionMismatch { expected: self.num_blocks(), found: weights.len() });
        }
        Ok(weights.iter().flat_map(|&w| core::iter::repeat(w).take(self.lag)).collect())
    }
}

/// Interleaved x, y, z of one joint from frame `d+1` to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatTarget {
    pub values: Vec<f64>,
    pub joint: String,
}

pub fn build_design_matrix(cycle: &GaitCycle, lag: usize) -> Result<DesignMatrix, GrangerError> {
    let n = cycle.num_frames();
    let p = cycle.num_joints();
    if lag == 0 || lag >= n {
        return Err(GrangerError::LagTooLarge { lag, frames: n });
    }
    let mut values = Matrix::zeros(3 * (n - lag), p * lag);
    for t in lag..n {
        for c in 0..3 {
            let row = values.row_mut(3 * (t - lag) + c);
            for j in 0..p {
                for k in 1..=lag {
                    row[j * lag + k - 1] = cycle.coords[(3 * j + c, t - k)];
                }
            }
        }
    }
    Ok(DesignMatrix { values, lag, joints: cycle.joints.clone(), channels: 3 })
}

pub fn flatten_target(cycle: &GaitCycle, joint: &str, lag: usize) -> Result<FlatTarget, GrangerError> {
    let n = cycle.num_frames();
    if lag == 0 || lag >= n {
        return Err(GrangerError::LagTooLarge { lag, frames: n });
    }
    let i = cycle.joint_index(joint).ok_or_else(|| GrangerError::UnknownJoint(joint.to_string()))?;
    let values = (lag..n).flat_map(|t| (0..3).map(move |c| (t, c))).map(|(t, c)| cycle.coords[(3 * i + c, t)]).collect();
    Ok(FlatTarget { values, joint: joint.to_string() })
}

const RIDGE_TRIGGER: f64 = 1e-10;
const RIDGE_SCALE: f64 = 1e-6;

/// Least-squares estimate from normal equations. When `G` is numerically
/// singular a ridge of `1e-6 · mean(diag G)` is added.
fn least_squares_from_gram(q: &QuadraticForm) -> Vec<f64> {
    let p = q.dim();
    let max_diag = (0..p).map(|k| q.gram[(k, k)]).fold(0.0, f64::max);
    if max_diag <= 0.0 {
        return vec![0.0; p];
    }
    if let Ok(chol) = Cholesky::new(&q.gram) {
        if chol.min_pivot() > RIDGE_TRIGGER * max_diag {
            return chol.solve(&q.xty).expect("dimension");
        }
    }
    let ridge = RIDGE_SCALE * (0..p).map(|k| q.gram[(k, k)]).sum::<f64>() / p as f64;
    let mut g = q.gram.clone();
    for k in 0..p {
        g[(k, k)] += ridge;
    }
    match Cholesky::new(&g) {
        Ok(chol) => chol.solve(&q.xty).expect("dimension"),
        // Only reachable with non-finite input.
        Err(_) => vec![0.0; p],
    }
}

/// Initial maximum-likelihood estimate of the Gaussian lagged regression.
pub fn mle_estimate(design: &DesignMatrix, target: &FlatTarget) -> Result<Vec<f64>, GrangerError> {
    let q = QuadraticForm::from_data(&design.values, &target.values)?;
    Ok(least_squares_from_gram(&q))
}

/// Adaptive weights `1 / max(‖β̂_j‖₁, floor)` per joint block.
pub fn adaptive_weights(design: &DesignMatrix, mle: &[f64], floor: f64) -> Result<Vec<f64>, GrangerError> {
    if mle.len() != design.cols() {
        return Err(GrangerError::DimensionMismatch { expected: design.cols(), found: mle.len() });
    }
    Ok((0..design.num_blocks())
        .map(|j| {
            let norm: f64 = mle[design.block_range(j)].iter().map(|b| abs(*b)).sum();
            1.0 / norm.max(floor)
        })
        .collect())
}

/// Solves `min ‖y − Xβ‖² + λ Σ_j w_j ‖β_j‖₁` with one weight per joint block.
pub fn adaptive_lasso_fit(
    design: &DesignMatrix,
    target: &FlatTarget,
    weights: &[f64],
    lambda: f64,
) -> Result<Vec<f64>, GrangerError> {
    let q = QuadraticForm::from_data(&design.values, &target.values)?;
    let w = design.expand_block_weights(weights)?;
    Ok(lasso::solve(&q, &w, lambda, None, &SolverOptions::default())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub grid: Vec<f64>,
    /// Mean validation squared error per grid point.
    pub errors: Vec<f64>,
}

/// Contiguous fold boundaries over `points` prediction time points.
pub fn fold_ranges(points: usize, folds: usize) -> Vec<Range<usize>> {
    (0..folds).map(|f| f * points / folds..(f + 1) * points / folds).collect()
}

struct CvPlan {
    full: QuadraticForm,
    folds: Vec<(QuadraticForm, QuadraticForm)>,
}

impl CvPlan {
    fn new(x: &Matrix, y: &[f64], channels: usize, folds: usize) -> Result<Self, GrangerError> {
        let points = x.rows() / channels;
        if folds > points {
            return Err(GrangerError::TooFewTimePoints { folds, points });
        }
        let full = QuadraticForm::from_data(x, y)?;
        let mut out = Vec::with_capacity(folds);
        for r in fold_ranges(points, folds) {
            let held = QuadraticForm::from_rows(x, y, r.start * channels..r.end * channels)?;
            out.push((full.minus(&held), held));
        }
        Ok(Self { full, folds: out })
    }

    fn run(&self, weights: &[f64], config: &GgmConfig) -> Result<CvResult, GrangerError> {
        let grid = lambda_grid(config);
        let opts = config.solver_options();
        let mut errors = vec![0.0; grid.len()];
        for (train, held) in &self.folds {
            let mut warm: Option<Vec<f64>> = None;
            for (g, &lambda) in grid.iter().enumerate() {
                let beta = lasso::solve(train, weights, lambda, warm.as_deref(), &opts)?;
                errors[g] += held.rss(&beta) / held.rows.max(1) as f64;
                warm = Some(beta);
            }
        }
        for e in &mut errors {
            *e /= self.folds.len() as f64;
        }
        // Grid runs largest first, so strict `<` keeps the sparsest of tied minima.
        let mut best = 0;
        for g in 1..grid.len() {
            if errors[g] < errors[best] {
                best = g;
            }
        }
        let lambda = grid[best];
        let beta = lasso::solve(&self.full, weights, lambda, None, &opts)?;
        Ok(CvResult { lambda, beta, grid, errors })
    }
}

/// Blocked k-fold cross-validation of λ over the configured grid, followed by
/// a refit on all rows at the selected λ.
pub fn cross_validate_lambda(
    design: &DesignMatrix,
    target: &FlatTarget,
    weights: &[f64],
    config: &GgmConfig,
) -> Result<CvResult, GrangerError> {
    config.validate()?;
    if target.values.len() != design.rows() {
        return Err(GrangerError::DimensionMismatch { expected: design.rows(), found: target.values.len() });
    }
    let w = design.expand_block_weights(weights)?;
    let plan = CvPlan::new(&design.values, &target.values, design.channels, config.cv_folds)?;
    plan.run(&w, config)
}

/// Fitted regression for one target joint (original data scale).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoefficientBlock {
    pub target: String,
    pub beta: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda_selected: f64,
    pub mle_beta: Vec<f64>,
}

/// Assembles the adjacency matrix: `A(j, i) = 1` iff some lag coefficient of
/// joint `j` in the regression of joint `i` exceeds the zero threshold.
/// Self-loops are never reported.
pub fn extract_edges(
    blocks: &[CoefficientBlock],
    joints: &[String],
    lag: usize,
    config: &GgmConfig,
) -> Result<CausalGraph, GrangerError> {
    let p = joints.len();
    if blocks.len() != p {
        return Err(GrangerError::DimensionMismatch { expected: p, found: blocks.len() });
    }
    let mut adj = Matrix::zeros(p, p);
    for (i, block) in blocks.iter().enumerate() {
        if block.beta.len() != p * lag {
            return Err(GrangerError::DimensionMismatch { expected: p * lag, found: block.beta.len() });
        }
        for j in 0..p {
            if j == i {
                continue;
            }
            if block.beta[j * lag..(j + 1) * lag].iter().any(|b| abs(*b) > config.zero_threshold) {
                adj[(j, i)] = 1.0;
            }
        }
    }
    Ok(CausalGraph::new(joints.to_vec(), adj, None)?)
}

/// Centering (per channel) and unit-variance scaling of design columns.
struct Standardization {
    /// Means indexed `[col][channel]`.
    means: Vec<Vec<f64>>,
    /// Column scale; zero marks a constant column.
    scales: Vec<f64>,
}

fn channel_means(values: impl Fn(usize) -> f64, rows: usize, channels: usize) -> Vec<f64> {
    let mut sums = vec![0.0; channels];
    for r in 0..rows {
        sums[r % channels] += values(r);
    }
    let per = (rows / channels) as f64;
    sums.iter().map(|s| s / per).collect()
}

impl Standardization {
    fn fit(x: &Matrix, channels: usize) -> Self {
        let rows = x.rows();
        let mut means = Vec::with_capacity(x.cols());
        let mut scales = Vec::with_capacity(x.cols());
        for c in 0..x.cols() {
            let m = channel_means(|r| x[(r, c)], rows, channels);
            let ss: f64 = (0..rows).map(|r| x[(r, c)] - m[r % channels]).map(|v| v * v).sum();
            let sd = sqrt(ss / rows as f64);
            let magnitude = (0..rows).map(|r| abs(x[(r, c)])).fold(0.0, f64::max);
            scales.push(if sd > 1e-12 * (1.0 + magnitude) { sd } else { 0.0 });
            means.push(m);
        }
        Self { means, scales }
    }

    fn apply(&self, x: &Matrix, channels: usize) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |r, c| {
            let s = self.scales[c];
            if s == 0.0 {
                0.0
            } else {
                (x[(r, c)] - self.means[c][r % channels]) / s
            }
        })
    }
}

/// Target centered per channel and scaled so that `‖y‖² = 1/2`, with its scale.
///
/// With unit-variance design columns this puts `‖y − Xβ‖² + λ·pen` on the
/// same λ scale as the usual `(1/2N)‖y − Xβ‖² + λ·pen` with a unit-variance
/// response, whatever the cycle length or amplitude.
fn standardize_target(y: &[f64], channels: usize) -> (Vec<f64>, f64) {
    let m = channel_means(|r| y[r], y.len(), channels);
    let centered: Vec<f64> = y.iter().enumerate().map(|(r, v)| v - m[r % channels]).collect();
    let sd = sqrt(2.0 * centered.iter().map(|v| v * v).sum::<f64>());
    let magnitude = y.iter().map(|v| abs(*v)).fold(0.0, f64::max);
    if sd > 1e-12 * (1.0 + magnitude) {
        (centered.iter().map(|v| v / sd).collect(), sd)
    } else {
        (vec![0.0; y.len()], 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GgmFit {
    pub graph: CausalGraph,
    pub blocks: Vec<CoefficientBlock>,
}

impl GgmFit {
    pub fn lambdas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.lambda_selected).collect()
    }
}

/// Runs the full causal-graph extraction for one gait cycle.
///
/// Design columns are centered per coordinate channel and scaled to unit
/// variance, each target is centered and scaled (see `standardize_target`), the per-target
/// weights come from the ridge-guarded least-squares estimate, λ is chosen by
/// blocked cross-validation, and coefficients are mapped back to the data
/// scale before thresholding.
pub fn fit_ggm(cycle: &GaitCycle, config: &GgmConfig) -> Result<GgmFit, GrangerError> {
    config.validate()?;
    let design = build_design_matrix(cycle, config.lag)?;
    let channels = design.channels;
    let std = Standardization::fit(&design.values, channels);
    let z = std.apply(&design.values, channels);
    let points = z.rows() / channels;
    if config.cv_folds > points {
        return Err(GrangerError::TooFewTimePoints { folds: config.cv_folds, points });
    }
    let folds = fold_ranges(points, config.cv_folds);
    let full_gram = z.gram();
    let fold_grams: Vec<Matrix> = folds
        .iter()
        .map(|r| Matrix::from_fn(channels * r.len(), z.cols(), |i, c| z[(channels * r.start + i, c)]).gram())
        .collect();

    let p = cycle.num_joints();
    let lag = config.lag;
    let mut blocks = Vec::with_capacity(p);
    for name in &cycle.joints {
        let target = flatten_target(cycle, name, lag)?;
        let (y, y_scale) = standardize_target(&target.values, channels);
        let full = QuadraticForm {
            gram: full_gram.clone(),
            xty: z.t_matvec(&y).expect("dimension"),
            yty: y.iter().map(|v| v * v).sum(),
            rows: z.rows(),
        };
        let mut fold_qs = Vec::with_capacity(folds.len());
        for (r, g) in folds.iter().zip(&fold_grams) {
            let rows = channels * r.start..channels * r.end;
            let sub_y = &y[rows.clone()];
            let xty = (0..z.cols()).map(|c| rows.clone().zip(sub_y).map(|(row, v)| z[(row, c)] * v).sum()).collect();
            let held = QuadraticForm { gram: g.clone(), xty, yty: sub_y.iter().map(|v| v * v).sum(), rows: rows.len() };
            fold_qs.push((full.minus(&held), held));
        }
        let plan = CvPlan { full, folds: fold_qs };

        let mle_std = least_squares_from_gram(&plan.full);
        let weights: Vec<f64> = match config.penalty {
            Penalty::AdaptiveLasso => adaptive_weights(&design, &mle_std, config.weight_floor)?,
            Penalty::PlainLasso => vec![1.0; p],
        };
        let cv = plan.run(&design.expand_block_weights(&weights)?, config)?;

        let to_data_scale = |b: &[f64]| -> Vec<f64> {
            b.iter()
                .zip(&std.scales)
                .map(|(&v, &s)| if s == 0.0 || y_scale == 0.0 { 0.0 } else { v * y_scale / s })
                .collect()
        };
        blocks.push(CoefficientBlock {
            target: name.clone(),
            beta: to_data_scale(&cv.beta),
            weights,
            lambda_selected: cv.lambda,
            mle_beta: to_data_scale(&mle_std),
        });
    }
    let mut graph = extract_edges(&blocks, &cycle.joints, lag, config)?;
    graph.source = Some(cycle.label.clone());
    Ok(GgmFit { graph, blocks })
}

pub fn compute_ggm(cycle: &GaitCycle, config: &GgmConfig) -> Result<CausalGraph, GrangerError> {
    fit_ggm(cycle, config).map(|f| f.graph)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
    pub rss: f64,
    /// Number of coefficients counted as nonzero.
    pub df: usize,
}

/// AIC and BIC of a fitted lagged regression, counting nonzero coefficients as
/// degrees of freedom.
pub fn information_criteria(
    design: &DesignMatrix,
    target: &FlatTarget,
    beta: &[f64],
    zero_threshold: f64,
) -> Result<InformationCriteria, GrangerError> {
    if beta.len() != design.cols() {
        return Err(GrangerError::DimensionMismatch { expected: design.cols(), found: beta.len() });
    }
    if target.values.len() != design.rows() {
        return Err(GrangerError::DimensionMismatch { expected: design.rows(), found: target.values.len() });
    }
    let fitted = design.values.matvec(beta).expect("dimension");
    let rss: f64 = fitted.iter().zip(&target.values).map(|(f, y)| (y - f) * (y - f)).sum();
    if rss == 0.0 {
        return Err(GrangerError::ZeroResidual);
    }
    let n = design.rows() as f64;
    let df = beta.iter().filter(|b| abs(**b) > zero_threshold).count();
    let base = n * ln(rss / n);
    Ok(InformationCriteria { aic: base + 2.0 * df as f64, bic: base + df as f64 * ln(n), rss, df })
}
