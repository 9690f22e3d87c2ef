//! Text exports: graphs, distance matrices, evaluation tables and ablation
//! heatmaps. Numbers use Rust's shortest round-trip formatting.

use ggm_core::evaluation::{AblationMatrix, ClassAccuracy, DistanceMatrix, EvalReport};
use ggm_core::graph::CausalGraph;
use serde::{Deserialize, Serialize};

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// JSON has no NaN; undefined values are written as `null`.
fn defined(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// `p` rows of `0`/`1`, row = cause, column = effect.
pub fn adjacency_csv(g: &CausalGraph) -> String {
    let p = g.num_joints();
    let mut out = String::new();
    for r in 0..p {
        let row: Vec<String> = (0..p).map(|c| if g.has_edge(r, c) { "1" } else { "0" }.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph; nodes are declared in the graph's joint order.
pub fn graph_dot(name: &str, g: &CausalGraph) -> String {
    let mut out = format!("digraph {} {{\n", quote(name));
    for j in &g.joint_order {
        out.push_str(&format!("  {};\n", quote(j)));
    }
    for (from, to) in g.edges() {
        out.push_str(&format!("  {} -> {};\n", quote(&g.joint_order[from]), quote(&g.joint_order[to])));
    }
    out.push_str("}\n");
    out
}

/// Square table with sample ids along both axes.
pub fn distance_matrix_csv(ids: &[String], dm: &DistanceMatrix) -> String {
    let mut header = vec!["id".to_string()];
    header.extend(ids.iter().cloned());
    let mut out = csv_line(&header);
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..dm.len()).map(|j| num(dm.get(i, j))));
        out.push_str(&csv_line(&row));
    }
    out
}

pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut out = csv_line(&["distance", "ccr", "dbi", "di"].map(String::from));
    for r in reports {
        out.push_str(&csv_line(&[r.distance.to_string(), num(r.ccr), num(r.dbi), num(r.di)]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub distance: String,
    pub ccr: Option<f64>,
    pub dbi: Option<f64>,
    pub di: Option<f64>,
    pub per_class: Vec<ClassAccuracy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub samples: usize,
    pub classes: usize,
    pub jaccard_complement: bool,
    pub reports: Vec<ReportRow>,
}

pub fn report_document(reports: &[EvalReport], samples: usize, classes: usize, jaccard_complement: bool) -> ReportDocument {
    ReportDocument {
        samples,
        classes,
        jaccard_complement,
        reports: reports
            .iter()
            .map(|r| ReportRow {
                distance: r.distance.to_string(),
                ccr: defined(r.ccr),
                dbi: defined(r.dbi),
                di: defined(r.di),
                per_class: r.per_class.clone(),
            })
            .collect(),
    }
}

/// Percent-decrease table with joint names on both axes.
pub fn ablation_csv(m: &AblationMatrix) -> String {
    let mut header = vec!["joint".to_string()];
    header.extend(m.joint_order.iter().cloned());
    let mut out = csv_line(&header);
    for (i, j) in m.joint_order.iter().enumerate() {
        let mut row = vec![j.clone()];
        row.extend((0..m.joint_order.len()).map(|k| num(m.values[(i, k)])));
        out.push_str(&csv_line(&row));
    }
    out
}

/// Whitespace table for gnuplot's `matrix rowheaders columnheaders`.
pub fn ablation_heatmap(m: &AblationMatrix) -> String {
    let mut out = format!("# percent decrease of {} under {}\n", m.metric, m.distance);
    out.push_str(&format!("{}\n", core::iter::once("joint").chain(m.joint_order.iter().map(String::as_str)).collect::<Vec<_>>().join(" ")));
    for (i, j) in m.joint_order.iter().enumerate() {
        let row: Vec<String> = (0..m.joint_order.len()).map(|k| num(m.values[(i, k)])).collect();
        out.push_str(&format!("{j} {}\n", row.join(" ")));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationDocument {
    pub metric: String,
    pub distance: String,
    pub baseline: Option<f64>,
    pub joint_order: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn ablation_document(m: &AblationMatrix) -> AblationDocument {
    let p = m.joint_order.len();
    AblationDocument {
        metric: m.metric.to_string(),
        distance: m.distance.to_string(),
        baseline: defined(m.baseline_value),
        joint_order: m.joint_order.clone(),
        values: (0..p).map(|i| (0..p).map(|k| defined(m.values[(i, k)])).collect()).collect(),
    }
}
