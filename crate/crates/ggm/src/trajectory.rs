//! Canonical trajectory tables.
//!
//! A table has the header `frame,<joint>_x,<joint>_y,<joint>_z,...` and one
//! row per frame. Full motion sequences carry a JSON sidecar with the subject,
//! frame rate, joint order and root; gait cycles take their metadata from the
//! archive manifest instead.

use std::fs;
use std::path::{Path, PathBuf};

use ggm_core::linalg::Matrix;
use ggm_core::mocap::{GaitCycle, MotionSequence};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

const AXES: [&str; 3] = ["x", "y", "z"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::MalformedCsv { line, message: message.into() }
}

/// Serializes `(3·p) × n` coordinates under the canonical header.
pub fn write_table(joints: &[String], coords: &Matrix) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["frame".to_string()];
    for j in joints {
        header.extend(AXES.iter().map(|a| format!("{j}_{a}")));
    }
    w.write_record(&header).expect("in-memory write");
    for t in 0..coords.cols() {
        let mut row = vec![t.to_string()];
        row.extend((0..coords.rows()).map(|r| format_float(coords[(r, t)])));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parses a canonical table into joint names and coordinates.
pub fn parse_table(text: &str) -> Result<(Vec<String>, Matrix), ParseError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if header.get(0) != Some("frame") {
        return Err(csv_err(1, "first column must be `frame`"));
    }
    let cols: Vec<&str> = header.iter().skip(1).collect();
    if cols.len() % 3 != 0 {
        return Err(csv_err(1, "coordinate columns must come in x, y, z triples"));
    }
    let mut joints = Vec::with_capacity(cols.len() / 3);
    for chunk in cols.chunks(3) {
        let name = chunk[0]
            .strip_suffix("_x")
            .ok_or_else(|| csv_err(1, format!("column `{}` should end in `_x`", chunk[0])))?;
        for (c, axis) in chunk.iter().zip(AXES) {
            if c.strip_suffix(&format!("_{axis}")) != Some(name) {
                return Err(csv_err(1, format!("expected `{name}_{axis}`, found `{c}`")));
            }
        }
        if name.is_empty() || joints.iter().any(|j| j == name) {
            return Err(csv_err(1, format!("bad or duplicate joint `{name}`")));
        }
        joints.push(name.to_string());
    }

    let rows = cols.len();
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let mut last_frame: Option<i64> = None;
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| csv_err(line, e.to_string()))?;
        if rec.len() != rows + 1 {
            return Err(csv_err(line, format!("expected {} fields, found {}", rows + 1, rec.len())));
        }
        let frame: i64 = rec[0].parse().map_err(|_| csv_err(line, format!("frame `{}` is not an integer", &rec[0])))?;
        if last_frame.is_some_and(|f| frame <= f) {
            return Err(csv_err(line, "frame numbers must increase"));
        }
        last_frame = Some(frame);
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| csv_err(line, format!("`{s}` is not a finite number"))))
            .collect::<Result<Vec<f64>, _>>()?;
        frames.push(values);
    }
    let coords = Matrix::from_fn(rows, frames.len(), |r, t| frames[t][r]);
    Ok((joints, coords))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub subject: Option<String>,
    pub frame_rate: f64,
    pub joints: Vec<String>,
    pub root: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_track: Option<Vec<[f64; 3]>>,
}

pub fn sequence_meta(seq: &MotionSequence) -> TrajectoryMeta {
    TrajectoryMeta {
        subject: seq.label.clone(),
        frame_rate: seq.frame_rate,
        joints: seq.joints.clone(),
        root: seq.joints[seq.root].clone(),
        root_track: seq.root_track.clone(),
    }
}

/// Rebuilds a sequence from its table and sidecar.
pub fn sequence_from_parts(table: &str, meta: &TrajectoryMeta) -> Result<MotionSequence, ParseError> {
    let (joints, coords) = parse_table(table)?;
    if joints != meta.joints {
        return Err(csv_err(1, "header joints differ from the sidecar joint order"));
    }
    let root = joints
        .iter()
        .position(|j| *j == meta.root)
        .ok_or_else(|| csv_err(1, format!("root `{}` is not a column", meta.root)))?;
    let mut seq = MotionSequence::new(joints, root, coords, meta.frame_rate, meta.subject.clone())
        .map_err(|e| csv_err(1, e.to_string()))?;
    if let Some(track) = &meta.root_track {
        if track.len() != seq.num_frames() {
            return Err(csv_err(1, "root track length differs from the frame count"));
        }
        seq.root_track = Some(track.clone());
    }
    Ok(seq)
}

/// Path of the JSON sidecar that accompanies a trajectory table.
pub fn sidecar_path(table: &Path) -> PathBuf {
    table.with_extension("json")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_sequence(path: &Path, seq: &MotionSequence) -> Result<()> {
    write_text(path, &write_table(&seq.joints, &seq.coords))?;
    let meta = serde_json::to_string_pretty(&sequence_meta(seq)).expect("serializable");
    write_text(&sidecar_path(path), &(meta + "\n"))
}

pub fn load_sequence(path: &Path) -> Result<MotionSequence> {
    let side = sidecar_path(path);
    let meta: TrajectoryMeta =
        serde_json::from_str(&read_text(&side)?).map_err(|e| Error::parse(&side, ParseError::MalformedJson(e)))?;
    sequence_from_parts(&read_text(path)?, &meta).map_err(|e| Error::parse(path, e))
}

pub fn cycle_table(cycle: &GaitCycle) -> String {
    write_table(&cycle.joints, &cycle.coords)
}

pub fn parse_cycle(text: &str, label: &str) -> Result<GaitCycle, ParseError> {
    let (joints, coords) = parse_table(text)?;
    GaitCycle::new(joints, coords, label).map_err(|e| csv_err(1, e.to_string()))
}
