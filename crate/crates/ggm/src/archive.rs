//! On-disk archives: gait cycles (one table per cycle plus `manifest.json`)
//! and causal graphs (adjacency CSV, DOT and JSON per cycle plus
//! `graphs.json`).

use std::fs;
use std::path::Path;

use ggm_core::evaluation::LabeledFeatureSet;
use ggm_core::granger::{GgmConfig, GgmFit};
use ggm_core::graph::CausalGraph;
use ggm_core::linalg::Matrix;
use ggm_core::mocap::GaitCycle;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::export;
use crate::trajectory::{cycle_table, parse_cycle, read_text, write_text};

pub const CYCLE_MANIFEST: &str = "manifest.json";
pub const GRAPH_MANIFEST: &str = "graphs.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub file: String,
    pub subject: String,
    pub sequence: String,
    pub cycle: usize,
    pub source: String,
    /// Length of the source sequence.
    pub source_frames: usize,
    pub frames: usize,
    pub joints: Vec<String>,
}

impl CycleEntry {
    pub fn id(&self) -> &str {
        self.file.strip_suffix(".csv").unwrap_or(&self.file)
    }
}

/// Ground truth of one synthetic process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessEntry {
    pub id: String,
    pub series: Vec<String>,
    pub noise_std: f64,
    pub order: usize,
    pub seeds: Vec<u64>,
    /// Directed edges `[from, to]`.
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CycleManifest {
    pub fixed_length: usize,
    pub cycles: Vec<CycleEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub processes: Vec<ProcessEntry>,
}

/// Keeps letters, digits, `-` and `.` so that `_` stays a field separator.
pub fn sanitize(s: &str) -> String {
    let out: String = s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '-' }).collect();
    if out.is_empty() {
        "x".into()
    } else {
        out
    }
}

pub fn cycle_file_name(subject: &str, sequence: &str, cycle: usize) -> String {
    format!("{}_{}_{cycle}.csv", sanitize(subject), sanitize(sequence))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::parse(path, ParseError::MalformedJson(e)))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_cycle_archive(dir: &Path, manifest: &CycleManifest, cycles: &[GaitCycle]) -> Result<()> {
    create_dir(dir)?;
    for (entry, cycle) in manifest.cycles.iter().zip(cycles) {
        write_text(&dir.join(&entry.file), &cycle_table(cycle))?;
    }
    write_text(&dir.join(CYCLE_MANIFEST), &json(manifest))
}

pub fn read_cycle_archive(dir: &Path) -> Result<(CycleManifest, Vec<GaitCycle>)> {
    let manifest: CycleManifest = read_json(&dir.join(CYCLE_MANIFEST))?;
    let mut cycles = Vec::with_capacity(manifest.cycles.len());
    for entry in &manifest.cycles {
        let path = dir.join(&entry.file);
        let cycle = parse_cycle(&read_text(&path)?, &entry.subject).map_err(|e| Error::parse(&path, e))?;
        if cycle.joints != entry.joints {
            return Err(Error::Data(format!("{}: joints differ from the manifest", path.display())));
        }
        cycles.push(cycle);
    }
    Ok((manifest, cycles))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLambda {
    pub joint: String,
    pub lambda: f64,
}

/// JSON form of one extracted graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub id: String,
    pub label: String,
    pub joint_order: Vec<String>,
    /// Row `j`, column `i` is 1 for an edge `j → i`.
    pub adjacency: Vec<Vec<u8>>,
    pub config: GgmConfig,
    pub lambda: Vec<TargetLambda>,
}

impl GraphDocument {
    pub fn new(id: &str, label: &str, fit: &GgmFit, config: &GgmConfig) -> Self {
        let g = &fit.graph;
        let p = g.num_joints();
        Self {
            id: id.into(),
            label: label.into(),
            joint_order: g.joint_order.clone(),
            adjacency: (0..p).map(|r| (0..p).map(|c| g.has_edge(r, c) as u8).collect()).collect(),
            config: config.clone(),
            lambda: fit.blocks.iter().map(|b| TargetLambda { joint: b.target.clone(), lambda: b.lambda_selected }).collect(),
        }
    }

    pub fn graph(&self) -> Result<CausalGraph> {
        let p = self.joint_order.len();
        if self.adjacency.len() != p || self.adjacency.iter().any(|r| r.len() != p) {
            return Err(Error::Data(format!("graph {}: adjacency is not {p}x{p}", self.id)));
        }
        let a = Matrix::from_fn(p, p, |r, c| self.adjacency[r][c] as f64);
        CausalGraph::new(self.joint_order.clone(), a, Some(self.label.clone()))
            .map_err(|e| Error::Data(format!("graph {}: {e}", self.id)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEntry {
    pub id: String,
    pub label: String,
    pub adjacency: String,
    pub dot: String,
    pub json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphManifest {
    pub config: GgmConfig,
    pub graphs: Vec<GraphEntry>,
}

pub fn write_graph_archive(dir: &Path, config: &GgmConfig, docs: &[GraphDocument]) -> Result<GraphManifest> {
    create_dir(dir)?;
    let mut graphs = Vec::with_capacity(docs.len());
    for doc in docs {
        let graph = doc.graph()?;
        let entry = GraphEntry {
            id: doc.id.clone(),
            label: doc.label.clone(),
            adjacency: format!("{}.adj.csv", doc.id),
            dot: format!("{}.dot", doc.id),
            json: format!("{}.json", doc.id),
        };
        write_text(&dir.join(&entry.adjacency), &export::adjacency_csv(&graph))?;
        write_text(&dir.join(&entry.dot), &export::graph_dot(&doc.id, &graph))?;
        write_text(&dir.join(&entry.json), &json(doc))?;
        graphs.push(entry);
    }
    let manifest = GraphManifest { config: config.clone(), graphs };
    write_text(&dir.join(GRAPH_MANIFEST), &json(&manifest))?;
    Ok(manifest)
}

pub fn read_graph_archive(dir: &Path) -> Result<(GraphManifest, Vec<GraphDocument>)> {
    let manifest: GraphManifest = read_json(&dir.join(GRAPH_MANIFEST))?;
    let docs = manifest
        .graphs
        .iter()
        .map(|e| read_json::<GraphDocument>(&dir.join(&e.json)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, docs))
}

/// Labeled graphs of an archive, with the graph ids as sample ids.
pub fn feature_set(docs: &[GraphDocument]) -> Result<LabeledFeatureSet> {
    let graphs = docs.iter().map(GraphDocument::graph).collect::<Result<Vec<_>>>()?;
    let labels = docs.iter().map(|d| d.label.clone()).collect();
    let ids = docs.iter().map(|d| d.id.clone()).collect();
    Ok(LabeledFeatureSet::with_ids(graphs, labels, ids)?)
}
