//! Identity-discrimination scores of a labeled set of causal graphs: leave-one-out
//! 1-NN correct classification rate, a medoid Davies-Bouldin index, the Dunn
//! index, and joint-pair ablation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::distance::{self, DistanceError, DistanceId, ScatterModel};
use crate::graph::CausalGraph;
use crate::linalg::Matrix;
use crate::num::sqrt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("need at least two distinct labels")]
    TooFewClasses,
    #[error("{0} labels for {1} graphs")]
    LabelCount(usize, usize),
    #[error("graph {0} has a different joint order or size")]
    InconsistentGraphs(usize),
    #[error("medoids of classes `{0}` and `{1}` coincide")]
    CoincidentMedoids(String, String),
    #[error("every class has zero diameter")]
    ZeroDiameter,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Graphs with subject labels and stable sample identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureSet {
    graphs: Vec<CausalGraph>,
    labels: Vec<String>,
    ids: Vec<String>,
}

impl LabeledFeatureSet {
    /// Sample ids default to the zero-padded position.
    pub fn new(graphs: Vec<CausalGraph>, labels: Vec<String>) -> Result<Self, EvalError> {
        let ids = (0..graphs.len()).map(|i| alloc::format!("{i:08}")).collect();
        Self::with_ids(graphs, labels, ids)
    }

    pub fn with_ids(graphs: Vec<CausalGraph>, labels: Vec<String>, ids: Vec<String>) -> Result<Self, EvalError> {
        if labels.len() != graphs.len() {
            return Err(EvalError::LabelCount(labels.len(), graphs.len()));
        }
        if ids.len() != graphs.len() {
            return Err(EvalError::LabelCount(ids.len(), graphs.len()));
        }
        if let Some(first) = graphs.first() {
            for (k, g) in graphs.iter().enumerate() {
                if g.joint_order != first.joint_order {
                    return Err(EvalError::InconsistentGraphs(k));
                }
            }
        }
        let mut distinct: Vec<&String> = labels.iter().collect();
        distinct.sort();
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(EvalError::TooFewClasses);
        }
        Ok(Self { graphs, labels, ids })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[CausalGraph] {
        &self.graphs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn joint_order(&self) -> &[String] {
        &self.graphs[0].joint_order
    }

    /// Same set with edges `i→j` and `j→i` removed from every graph.
    pub fn without_pair(&self, i: usize, j: usize) -> Self {
        Self {
            graphs: self.graphs.iter().map(|g| g.without_pair(i, j)).collect(),
            labels: self.labels.clone(),
            ids: self.ids.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    /// Use `1 − δ_J` in place of the Jaccard ratio; two empty graphs are then
    /// at distance 0 instead of undefined.
    pub jaccard_complement: bool,
}

/// Symmetric matrix of pairwise sample distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Result<f64, DistanceError>) -> Result<Self, DistanceError> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j)?;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(Self { n, values })
    }

    /// Builds from a full row-major buffer (upper triangle mirrored).
    pub fn from_upper(n: usize, upper: &[f64]) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                values[i * n + j] = upper[i * n + j];
                values[j * n + i] = upper[i * n + j];
            }
        }
        Self { n, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_row_major(self.n, self.n, self.values.clone())
    }
}

/// Pairwise distances over the set under one distance function. Mahalanobis
/// fits its scatter model on the set itself.
pub fn pairwise_distances(
    set: &LabeledFeatureSet,
    id: DistanceId,
    opts: EvalOptions,
) -> Result<DistanceMatrix, EvalError> {
    let n = set.len();
    let mats: Vec<&Matrix> = set.graphs.iter().map(|g| &g.adjacency).collect();
    if id == DistanceId::Mahalanobis {
        let data: Vec<Matrix> = mats.iter().map(|m| (*m).clone()).collect();
        let model = distance::fit_scatter_default(&data)?;
        return Ok(whitened_distances(&model, &data)?);
    }
    let complement = opts.jaccard_complement && id == DistanceId::Jaccard;
    Ok(DistanceMatrix::from_fn(n, |i, j| {
        if complement {
            // Two empty graphs are the same edge set.
            return match distance::distance(mats[i], mats[j], id, None) {
                Ok(d) => Ok(1.0 - d),
                Err(DistanceError::JaccardUndefined) => Ok(0.0),
                Err(e) => Err(e),
            };
        }
        distance::distance(mats[i], mats[j], id, None)
    })?)
}

fn whitened_distances(model: &ScatterModel, data: &[Matrix]) -> Result<DistanceMatrix, DistanceError> {
    let white: Vec<Vec<f64>> = data.iter().map(|m| model.whiten(m)).collect::<Result<_, _>>()?;
    DistanceMatrix::from_fn(data.len(), |i, j| {
        Ok(sqrt(white[i].iter().zip(&white[j]).map(|(a, b)| (a - b) * (a - b)).sum()))
    })
}

/// Class index per sample, classes ordered by label.
fn class_index(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut names: Vec<String> = labels.to_vec();
    names.sort();
    names.dedup();
    let idx = labels.iter().map(|l| names.binary_search(l).expect("label present")).collect();
    (names, idx)
}

/// Relative gap below which two distances count as tied. Functions that agree
/// mathematically (Frobenius and Hilbert-Schmidt) differ by rounding, and
/// exact ties are common on binary graphs.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn compare_with_ties(x: f64, y: f64) -> Ordering {
    if (x - y).abs() <= TIE_TOLERANCE * x.abs().max(y.abs()) {
        Ordering::Equal
    } else {
        x.total_cmp(&y)
    }
}

/// Smaller distance wins; ties go to the smaller sample id, then position.
fn closer(dm: &DistanceMatrix, ids: &[String], from: usize, a: usize, b: usize) -> bool {
    match compare_with_ties(dm.get(from, a), dm.get(from, b)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => (&ids[a], a) < (&ids[b], b),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassAccuracy {
    pub label: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcrResult {
    pub ccr: f64,
    pub per_class: Vec<ClassAccuracy>,
    /// Nearest neighbour of each sample.
    pub neighbours: Vec<usize>,
}

/// Leave-one-out 1-NN classification over a precomputed distance matrix.
pub fn ccr_from_distances(dm: &DistanceMatrix, labels: &[String], ids: &[String]) -> Result<CcrResult, EvalError> {
    let n = dm.len();
    if n < 2 {
        return Err(EvalError::TooFewSamples { needed: 2, got: n });
    }
    let (names, class) = class_index(labels);
    let mut correct = vec![0usize; names.len()];
    let mut total = vec![0usize; names.len()];
    let mut neighbours = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = if i == 0 { 1 } else { 0 };
        for j in 0..n {
            if j != i && j != best && closer(dm, ids, i, j, best) {
                best = j;
            }
        }
        neighbours.push(best);
        total[class[i]] += 1;
        if class[best] == class[i] {
            correct[class[i]] += 1;
        }
    }
    let per_class = names
        .into_iter()
        .enumerate()
        .map(|(c, label)| ClassAccuracy {
            label,
            correct: correct[c],
            total: total[c],
            accuracy: correct[c] as f64 / total[c] as f64,
        })
        .collect();
    Ok(CcrResult { ccr: correct.iter().sum::<usize>() as f64 / n as f64, per_class, neighbours })
}

pub fn ccr_loo_1nn(set: &LabeledFeatureSet, id: DistanceId) -> Result<f64, EvalError> {
    let dm = pairwise_distances(set, id, EvalOptions::default())?;
    Ok(ccr_from_distances(&dm, &set.labels, &set.ids)?.ccr)
}

fn members(class: &[usize], c: usize) -> Vec<usize> {
    class.iter().enumerate().filter(|(_, &k)| k == c).map(|(i, _)| i).collect()
}

/// Medoid of each class: the member with the least total distance to its class.
pub fn class_medoids(dm: &DistanceMatrix, labels: &[String], ids: &[String]) -> Vec<(String, usize)> {
    let (names, class) = class_index(labels);
    names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let m = members(&class, c);
            let cost = |i: usize| m.iter().map(|&j| dm.get(i, j)).sum::<f64>();
            let mut best = m[0];
            for &i in &m[1..] {
                match compare_with_ties(cost(i), cost(best)) {
                    Ordering::Less => best = i,
                    Ordering::Equal if (&ids[i], i) < (&ids[best], best) => best = i,
                    _ => {}
                }
            }
            (name, best)
        })
        .collect()
}

/// Davies-Bouldin index with medoids in place of centroids.
pub fn davies_bouldin_from_distances(dm: &DistanceMatrix, labels: &[String], ids: &[String]) -> Result<f64, EvalError> {
    let (_, class) = class_index(labels);
    let medoids = class_medoids(dm, labels, ids);
    let k = medoids.len();
    if k < 2 {
        return Err(EvalError::TooFewClasses);
    }
    let scatter: Vec<f64> = (0..k)
        .map(|c| {
            let m = members(&class, c);
            m.iter().map(|&i| dm.get(i, medoids[c].1)).sum::<f64>() / m.len() as f64
        })
        .collect();
    let mut total = 0.0;
    for c in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for o in 0..k {
            if o == c {
                continue;
            }
            let sep = dm.get(medoids[c].1, medoids[o].1);
            if sep == 0.0 {
                let (a, b) = if c < o { (c, o) } else { (o, c) };
                return Err(EvalError::CoincidentMedoids(medoids[a].0.clone(), medoids[b].0.clone()));
            }
            worst = worst.max((scatter[c] + scatter[o]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

pub fn davies_bouldin(set: &LabeledFeatureSet, id: DistanceId) -> Result<f64, EvalError> {
    let dm = pairwise_distances(set, id, EvalOptions::default())?;
    davies_bouldin_from_distances(&dm, &set.labels, &set.ids)
}

/// Smallest between-class distance over the largest class diameter.
pub fn dunn_from_distances(dm: &DistanceMatrix, labels: &[String]) -> Result<f64, EvalError> {
    let (names, class) = class_index(labels);
    if names.len() < 2 {
        return Err(EvalError::TooFewClasses);
    }
    let n = dm.len();
    let mut min_inter = f64::INFINITY;
    let mut max_diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            if class[i] == class[j] {
                max_diam = max_diam.max(d);
            } else {
                min_inter = min_inter.min(d);
            }
        }
    }
    if max_diam == 0.0 {
        return Err(EvalError::ZeroDiameter);
    }
    Ok(min_inter / max_diam)
}

pub fn dunn_index(set: &LabeledFeatureSet, id: DistanceId) -> Result<f64, EvalError> {
    let dm = pairwise_distances(set, id, EvalOptions::default())?;
    dunn_from_distances(&dm, &set.labels)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub distance: DistanceId,
    pub ccr: f64,
    pub dbi: f64,
    pub di: f64,
    pub per_class: Vec<ClassAccuracy>,
}

pub fn evaluate_distances(dm: &DistanceMatrix, set: &LabeledFeatureSet, id: DistanceId) -> Result<EvalReport, EvalError> {
    let ccr = ccr_from_distances(dm, &set.labels, &set.ids)?;
    Ok(EvalReport {
        distance: id,
        ccr: ccr.ccr,
        dbi: davies_bouldin_from_distances(dm, &set.labels, &set.ids)?,
        di: dunn_from_distances(dm, &set.labels)?,
        per_class: ccr.per_class,
    })
}

pub fn evaluate(set: &LabeledFeatureSet, id: DistanceId, opts: EvalOptions) -> Result<EvalReport, EvalError> {
    let dm = pairwise_distances(set, id, opts)?;
    evaluate_distances(&dm, set, id)
}

/// One report per distance function, in table order.
pub fn compare_distances(set: &LabeledFeatureSet, opts: EvalOptions) -> Result<Vec<EvalReport>, EvalError> {
    DistanceId::ALL.iter().map(|&id| evaluate(set, id, opts)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    Ccr,
    Dbi,
    Di,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Ccr, Metric::Dbi, Metric::Di];

    /// Best-performing distance per metric on the motion-capture benchmark:
    /// total norm for CCR, Ky-Fan 1-norm for DBI and DI.
    pub fn default_distance(self) -> DistanceId {
        match self {
            Metric::Ccr => DistanceId::Total,
            Metric::Dbi | Metric::Di => DistanceId::KyFan(1),
        }
    }

    pub fn score(self, dm: &DistanceMatrix, set: &LabeledFeatureSet) -> Result<f64, EvalError> {
        match self {
            Metric::Ccr => Ok(ccr_from_distances(dm, &set.labels, &set.ids)?.ccr),
            Metric::Dbi => davies_bouldin_from_distances(dm, &set.labels, &set.ids),
            Metric::Di => dunn_from_distances(dm, &set.labels),
        }
    }

    /// Loss of discrimination in percent; positive means worse. DBI is
    /// lower-is-better, the others higher-is-better.
    pub fn percent_decrease(self, baseline: f64, ablated: f64) -> f64 {
        let delta = match self {
            Metric::Ccr | Metric::Di => baseline - ablated,
            Metric::Dbi => ablated - baseline,
        };
        if delta == 0.0 {
            0.0
        } else {
            100.0 * delta / baseline
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Ccr => "ccr",
            Metric::Dbi => "dbi",
            Metric::Di => "di",
        })
    }
}

impl FromStr for Metric {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ccr" => Ok(Metric::Ccr),
            "dbi" => Ok(Metric::Dbi),
            "di" | "dunn" => Ok(Metric::Di),
            _ => Err(EvalError::UnknownMetric(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationMatrix {
    pub metric: Metric,
    pub distance: DistanceId,
    pub joint_order: Vec<String>,
    /// Percent decrease per unordered joint pair, mirrored; zero diagonal.
    pub values: Matrix,
    pub baseline_value: f64,
    pub baseline: EvalReport,
}

/// Report on the unablated set for an ablation of `metric`. Only `metric`
/// must be defined; the other two are NaN when undefined (a class-free DI on
/// duplicated samples, say) instead of aborting the study.
pub fn baseline_report(
    set: &LabeledFeatureSet,
    metric: Metric,
    id: DistanceId,
    opts: EvalOptions,
) -> Result<EvalReport, EvalError> {
    let dm = pairwise_distances(set, id, opts)?;
    let ccr = ccr_from_distances(&dm, &set.labels, &set.ids)?;
    let value = |m: Metric| match m.score(&dm, set) {
        Ok(v) => Ok(v),
        Err(e) if m == metric => Err(e),
        Err(_) => Ok(f64::NAN),
    };
    Ok(EvalReport {
        distance: id,
        ccr: ccr.ccr,
        dbi: value(Metric::Dbi)?,
        di: value(Metric::Di)?,
        per_class: ccr.per_class,
    })
}

/// All unordered joint pairs `(i, j)` with `i < j`.
pub fn joint_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect()
}

/// Metric value after removing both edges between joints `i` and `j`.
pub fn ablated_score(
    set: &LabeledFeatureSet,
    metric: Metric,
    id: DistanceId,
    opts: EvalOptions,
    pair: (usize, usize),
) -> Result<f64, EvalError> {
    let ablated = set.without_pair(pair.0, pair.1);
    let dm = pairwise_distances(&ablated, id, opts)?;
    metric.score(&dm, &ablated)
}

/// Assembles an ablation matrix from per-pair metric values listed in
/// [`joint_pairs`] order.
pub fn assemble_ablation(
    set: &LabeledFeatureSet,
    metric: Metric,
    id: DistanceId,
    baseline: EvalReport,
    scores: &[f64],
) -> AblationMatrix {
    let p = set.joint_order().len();
    let baseline_value = match metric {
        Metric::Ccr => baseline.ccr,
        Metric::Dbi => baseline.dbi,
        Metric::Di => baseline.di,
    };
    let mut values = Matrix::zeros(p, p);
    for (&(i, j), &s) in joint_pairs(p).iter().zip(scores) {
        let v = metric.percent_decrease(baseline_value, s);
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    AblationMatrix { metric, distance: id, joint_order: set.joint_order().to_vec(), values, baseline_value, baseline }
}

/// Percent decrease of `metric` after removing each joint pair in turn.
pub fn ablate_joint_pairs(
    set: &LabeledFeatureSet,
    metric: Metric,
    id: DistanceId,
    opts: EvalOptions,
) -> Result<AblationMatrix, EvalError> {
    let baseline = baseline_report(set, metric, id, opts)?;
    let p = set.joint_order().len();
    let scores = joint_pairs(p)
        .into_iter()
        .map(|pair| ablated_score(set, metric, id, opts, pair))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_ablation(set, metric, id, baseline, &scores))
}

/// Per-label counts, handy for reports.
pub fn label_counts(labels: &[String]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(l.clone()).or_insert(0) += 1;
    }
    m
}
