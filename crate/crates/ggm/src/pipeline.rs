//! The six pipeline stages. Each `run_*` function validates its
//! configuration before reading or writing anything, computes on a bounded
//! worker pool, and writes results from the calling thread in canonical
//! order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ggm_core::distance::{DistanceError, DistanceId};
use ggm_core::evaluation::{
    ablated_score, assemble_ablation, baseline_report, ccr_from_distances, davies_bouldin_from_distances,
    dunn_from_distances, joint_pairs, label_counts,
    pairwise_distances, AblationMatrix, DistanceMatrix, EvalError, EvalReport, LabeledFeatureSet, Metric,
};
use ggm_core::granger::{fit_ggm, GrangerError};
use ggm_core::mocap::{
    build_prototype_skeleton, forward_kinematics, normalize_pose, segment_gait_cycles, CycleOptions, GaitCycle,
    MocapError, MotionSequence,
};
use ggm_core::synth::generate_cycle;
use ggm_core::synth::true_graph;
use log::{info, warn};
use rayon::prelude::*;

use crate::archive::{
    self, cycle_file_name, CycleEntry, CycleManifest, GraphDocument, ProcessEntry,
};
use crate::asf::{parse_amc, parse_asf, Asf};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::export;
use crate::trajectory::{load_sequence, read_text, write_text};

pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

fn require_out(cfg: &PipelineConfig) -> Result<PathBuf> {
    let out = cfg.out.clone().ok_or_else(|| Error::Config("no output directory given (--out)".into()))?;
    if out.exists() && !out.is_dir() {
        return Err(Error::Config(format!("{} exists and is not a directory", out.display())));
    }
    Ok(out)
}

fn require_archive(cfg: &PipelineConfig, manifest: &str) -> Result<PathBuf> {
    let [dir] = cfg.inputs.as_slice() else {
        return Err(Error::Config(format!("expected exactly one input archive, got {}", cfg.inputs.len())));
    };
    if !dir.join(manifest).is_file() {
        return Err(Error::Config(format!("{} has no {manifest}", dir.display())));
    }
    Ok(dir.clone())
}

fn ext(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string()
}

/// Input files, directories expanded recursively, in sorted order per
/// directory.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
            .collect::<Result<_>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            walk(p, &mut out)?;
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub struct IngestOutput {
    pub manifest: CycleManifest,
    pub cycles: Vec<GaitCycle>,
    pub warnings: Vec<String>,
}

struct Source {
    path: PathBuf,
    subject: String,
    sequence: String,
    seq: MotionSequence,
}

fn sequence_name(subject: &str, stem: &str) -> String {
    stem.strip_prefix(subject).and_then(|r| r.strip_prefix('_')).filter(|r| !r.is_empty()).unwrap_or(stem).to_string()
}

fn load_sources(cfg: &PipelineConfig, warnings: &mut Vec<String>) -> Result<Vec<Source>> {
    let files = expand_inputs(&cfg.inputs)?;
    let mut asfs: Vec<(String, PathBuf, Asf)> = Vec::new();
    for f in files.iter().filter(|f| ext(f) == "asf") {
        let asf = parse_asf(&read_text(f)?).map_err(|e| Error::parse(f, e))?;
        asfs.push((stem(f), f.clone(), asf));
    }
    let prototype = if cfg.prototype && !asfs.is_empty() {
        let skeletons: Vec<_> = asfs.iter().map(|a| a.2.skeleton.clone()).collect();
        match build_prototype_skeleton(&skeletons) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(format!("no prototype skeleton, using each subject's own: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut used = vec![false; asfs.len()];
    let mut sources = Vec::new();
    for f in &files {
        match ext(f).as_str() {
            "amc" => {
                let s = stem(f);
                let prefix = s.split('_').next().unwrap_or(&s);
                let k = asfs
                    .iter()
                    .position(|a| a.0.eq_ignore_ascii_case(prefix))
                    .or_else(|| (asfs.len() == 1).then_some(0))
                    .ok_or_else(|| Error::Data(format!("{}: no matching ASF skeleton", f.display())))?;
                used[k] = true;
                let (subject, _, asf) = &asfs[k];
                let channels = parse_amc(&read_text(f)?, asf, cfg.frame_rate).map_err(|e| Error::parse(f, e))?;
                let skeleton = prototype.as_ref().unwrap_or(&asf.skeleton);
                let mut seq =
                    forward_kinematics(skeleton, &channels).map_err(|e| Error::Mocap { path: f.clone(), source: e })?;
                seq.label = Some(subject.clone());
                sources.push(Source { path: f.clone(), subject: subject.clone(), sequence: sequence_name(subject, &s), seq });
            }
            "csv" => {
                let seq = load_sequence(f)?;
                let s = stem(f);
                let subject = seq.label.clone().unwrap_or_else(|| s.split('_').next().unwrap_or(&s).to_string());
                sources.push(Source { path: f.clone(), sequence: sequence_name(&subject, &s), subject, seq });
            }
            "asf" | "json" => {}
            _ => warnings.push(format!("{}: ignored, not an ASF, AMC or trajectory table", f.display())),
        }
    }
    for ((_, path, _), u) in asfs.iter().zip(&used) {
        if !u {
            warnings.push(format!("{}: no AMC motion paired with this skeleton", path.display()));
        }
    }
    Ok(sources)
}

fn restrict(cycle: &GaitCycle, joints: &[String]) -> GaitCycle {
    let idx: Vec<usize> = joints.iter().map(|j| cycle.joint_index(j).expect("common joint")).collect();
    let coords =
        ggm_core::linalg::Matrix::from_fn(3 * idx.len(), cycle.num_frames(), |r, t| cycle.coords[(3 * idx[r / 3] + r % 3, t)]);
    GaitCycle { joints: joints.to_vec(), coords, label: cycle.label.clone() }
}

/// Parses, normalizes and segments every input. Files without a detectable
/// walk produce warnings. Joints static in any cycle are dropped from all of
/// them so that every cycle shares one joint order.
pub fn ingest(cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> Result<IngestOutput> {
    let mut warnings = Vec::new();
    let sources = load_sources(cfg, &mut warnings)?;
    let segmented: Vec<Result<Vec<GaitCycle>>> = pool.install(|| {
        sources
            .par_iter()
            .map(|s| {
                let opts = CycleOptions::detect(&s.seq.joints);
                normalize_pose(&s.seq)
                    .and_then(|n| segment_gait_cycles(&n, cfg.fixed_length, &opts))
                    .map_err(|e| Error::Mocap { path: s.path.clone(), source: e })
            })
            .collect()
    });

    let mut found: Vec<(&Source, Vec<GaitCycle>)> = Vec::new();
    for (s, r) in sources.iter().zip(segmented) {
        match r {
            Ok(c) => found.push((s, c)),
            Err(Error::Mocap { path, source: e @ (MocapError::NoCycleDetected | MocapError::DegenerateHeading { .. }) }) => {
                warnings.push(format!("{}: {e}", path.display()))
            }
            Err(e) => return Err(e),
        }
    }

    let mut common: Option<Vec<String>> = None;
    for c in found.iter().flat_map(|f| &f.1) {
        common = Some(match common {
            None => c.joints.clone(),
            Some(prev) => prev.into_iter().filter(|j| c.joints.contains(j)).collect(),
        });
    }
    let common = common.unwrap_or_default();

    let mut manifest = CycleManifest { fixed_length: cfg.fixed_length, ..CycleManifest::default() };
    let mut cycles = Vec::new();
    for (s, cs) in found {
        for (k, c) in cs.iter().enumerate() {
            let c = restrict(c, &common).into_canonical_order();
            manifest.cycles.push(CycleEntry {
                file: cycle_file_name(&s.subject, &s.sequence, k),
                subject: s.subject.clone(),
                sequence: s.sequence.clone(),
                cycle: k,
                source: s.path.display().to_string(),
                source_frames: s.seq.num_frames(),
                frames: c.num_frames(),
                joints: c.joints.clone(),
            });
            cycles.push(c);
        }
    }
    let mut seen = BTreeMap::new();
    for e in &manifest.cycles {
        if let Some(prev) = seen.insert(e.file.clone(), e.source.clone()) {
            return Err(Error::Data(format!("{} and {} map to the same cycle file {}", prev, e.source, e.file)));
        }
    }
    Ok(IngestOutput { manifest, cycles, warnings })
}

pub fn run_ingest(cfg: &PipelineConfig) -> Result<IngestOutput> {
    cfg.validate()?;
    let out = require_out(cfg)?;
    if cfg.inputs.is_empty() {
        return Err(Error::Config("no inputs given".into()));
    }
    if let Some(missing) = cfg.inputs.iter().find(|p| !p.exists()) {
        return Err(Error::Config(format!("{} does not exist", missing.display())));
    }
    let pool = worker_pool(cfg.jobs)?;
    let result = ingest(cfg, &pool)?;
    for w in &result.warnings {
        warn!("{w}");
    }
    archive::write_cycle_archive(&out, &result.manifest, &result.cycles)?;
    info!("wrote {} cycles to {}", result.cycles.len(), out.display());
    Ok(result)
}

pub struct ExtractOutput {
    pub docs: Vec<GraphDocument>,
    pub failures: Vec<(String, GrangerError)>,
}

impl ExtractOutput {
    /// Exit status implied by the failures.
    pub fn status(&self) -> i32 {
        use crate::error::exit;
        if self.failures.iter().any(|(_, e)| e.is_numerical()) {
            exit::NUMERICAL
        } else if self.failures.is_empty() {
            exit::OK
        } else {
            exit::DATA
        }
    }
}

pub fn extract(manifest: &CycleManifest, cycles: &[GaitCycle], cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> ExtractOutput {
    let fits: Vec<_> = pool.install(|| cycles.par_iter().map(|c| fit_ggm(c, &cfg.ggm)).collect());
    let mut docs = Vec::new();
    let mut failures = Vec::new();
    for ((entry, cycle), fit) in manifest.cycles.iter().zip(cycles).zip(fits) {
        match fit {
            Ok(f) => docs.push(GraphDocument::new(entry.id(), &cycle.label, &f, &cfg.ggm)),
            Err(e) => failures.push((entry.id().to_string(), e)),
        }
    }
    ExtractOutput { docs, failures }
}

pub fn run_extract(cfg: &PipelineConfig) -> Result<ExtractOutput> {
    cfg.validate()?;
    let out = require_out(cfg)?;
    let dir = require_archive(cfg, archive::CYCLE_MANIFEST)?;
    let pool = worker_pool(cfg.jobs)?;
    let (manifest, cycles) = archive::read_cycle_archive(&dir)?;
    let result = extract(&manifest, &cycles, cfg, &pool);
    for (id, e) in &result.failures {
        warn!("cycle {id}: {e}");
    }
    archive::write_graph_archive(&out, &cfg.ggm, &result.docs)?;
    Ok(result)
}

fn load_features(cfg: &PipelineConfig) -> Result<LabeledFeatureSet> {
    let dir = require_archive(cfg, archive::GRAPH_MANIFEST)?;
    let (_, docs) = archive::read_graph_archive(&dir)?;
    archive::feature_set(&docs)
}

pub fn distance_matrices(
    set: &LabeledFeatureSet,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<(DistanceId, DistanceMatrix)>> {
    let ids: Vec<DistanceId> = match cfg.distance {
        Some(id) => vec![id],
        None => DistanceId::ALL.to_vec(),
    };
    let opts = cfg.eval_options();
    // Running every function skips one that is undefined on this data; asking
    // for it by name is an error.
    let skip_undefined = cfg.distance.is_none();
    let all = pool.install(|| {
        ids.par_iter()
            .map(|&id| match pairwise_distances(set, id, opts) {
                Ok(dm) => Ok(Some((id, dm))),
                Err(EvalError::Distance(e @ (DistanceError::JaccardUndefined | DistanceError::HammingUndefined)))
                    if skip_undefined =>
                {
                    warn!("{id}: {e}; no matrix written");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(all.into_iter().flatten().collect())
}

pub fn run_dist(cfg: &PipelineConfig) -> Result<Vec<(DistanceId, DistanceMatrix)>> {
    cfg.validate()?;
    let out = require_out(cfg)?;
    let pool = worker_pool(cfg.jobs)?;
    let set = load_features(cfg)?;
    let result = distance_matrices(&set, cfg, &pool)?;
    archive::create_dir(&out)?;
    for (id, dm) in &result {
        write_text(&out.join(format!("distances_{id}.csv")), &export::distance_matrix_csv(set.ids(), dm))?;
    }
    Ok(result)
}

/// An index that is undefined on this data (coincident medoids, all classes
/// of zero diameter) becomes NaN with a warning instead of failing the table.
fn or_undefined(id: DistanceId, what: &str, r: Result<f64, EvalError>) -> Result<f64> {
    match r {
        Err(e @ (EvalError::CoincidentMedoids(..) | EvalError::ZeroDiameter)) => {
            warn!("{id}: {what} undefined: {e}");
            Ok(f64::NAN)
        }
        r => Ok(r?),
    }
}

fn report(set: &LabeledFeatureSet, id: DistanceId, opts: ggm_core::evaluation::EvalOptions) -> Result<EvalReport> {
    let dm = match pairwise_distances(set, id, opts) {
        Ok(dm) => dm,
        Err(EvalError::Distance(e @ (DistanceError::JaccardUndefined | DistanceError::HammingUndefined))) => {
            warn!("{id}: {e}; row left undefined");
            return Ok(EvalReport { distance: id, ccr: f64::NAN, dbi: f64::NAN, di: f64::NAN, per_class: Vec::new() });
        }
        Err(e) => return Err(e.into()),
    };
    let ccr = ccr_from_distances(&dm, set.labels(), set.ids())?;
    Ok(EvalReport {
        distance: id,
        ccr: ccr.ccr,
        dbi: or_undefined(id, "Davies-Bouldin index", davies_bouldin_from_distances(&dm, set.labels(), set.ids()))?,
        di: or_undefined(id, "Dunn index", dunn_from_distances(&dm, set.labels()))?,
        per_class: ccr.per_class,
    })
}

/// One report per distance function, in table order. A function undefined on
/// some pair of graphs (the Jaccard ratio of two empty graphs) yields a row of
/// NaN rather than failing the table.
pub fn evaluate_all(set: &LabeledFeatureSet, cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> Result<Vec<EvalReport>> {
    let opts = cfg.eval_options();
    pool.install(|| DistanceId::ALL.par_iter().map(|&id| report(set, id, opts)).collect())
}

pub fn run_eval(cfg: &PipelineConfig) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let out = require_out(cfg)?;
    let pool = worker_pool(cfg.jobs)?;
    let set = load_features(cfg)?;
    let reports = evaluate_all(&set, cfg, &pool)?;
    archive::create_dir(&out)?;
    write_text(&out.join("report.csv"), &export::report_csv(&reports))?;
    let doc = export::report_document(&reports, set.len(), label_counts(set.labels()).len(), cfg.jaccard_complement);
    write_text(&out.join("report.json"), &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    Ok(reports)
}

pub fn ablate(set: &LabeledFeatureSet, cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> Result<Vec<AblationMatrix>> {
    let metrics: Vec<Metric> = match cfg.metric {
        Some(m) => vec![m],
        None => Metric::ALL.to_vec(),
    };
    let opts = cfg.eval_options();
    let pairs = joint_pairs(set.joint_order().len());
    let mut out = Vec::new();
    for metric in metrics {
        let id = cfg.distance.unwrap_or(metric.default_distance());
        let baseline = baseline_report(set, metric, id, opts)?;
        let scores: Vec<f64> = pool.install(|| {
            pairs.par_iter().map(|&pair| ablated_score(set, metric, id, opts, pair)).collect::<Result<Vec<_>, _>>()
        })?;
        out.push(assemble_ablation(set, metric, id, baseline, &scores));
    }
    Ok(out)
}

pub fn run_ablate(cfg: &PipelineConfig) -> Result<Vec<AblationMatrix>> {
    cfg.validate()?;
    let out = require_out(cfg)?;
    let pool = worker_pool(cfg.jobs)?;
    let set = load_features(cfg)?;
    let result = ablate(&set, cfg, &pool)?;
    archive::create_dir(&out)?;
    for m in &result {
        write_text(&out.join(format!("ablation_{}.csv", m.metric)), &export::ablation_csv(m))?;
        write_text(&out.join(format!("ablation_{}.dat", m.metric)), &export::ablation_heatmap(m))?;
    }
    let docs: Vec<_> = result.iter().map(export::ablation_document).collect();
    write_text(&out.join("ablation.json"), &(serde_json::to_string_pretty(&docs).expect("serializable") + "\n"))?;
    Ok(result)
}

pub struct SynthOutput {
    pub manifest: CycleManifest,
    pub cycles: Vec<GaitCycle>,
}

/// Seeds used for process `k`: the base seed plus its offset plus `0..count`.
pub fn process_seeds(cfg: &PipelineConfig, k: usize) -> Vec<u64> {
    let offset = cfg.synth.processes[k].seed_offset.unwrap_or(1000 * k as u64);
    (0..cfg.synth.count as u64).map(|s| cfg.seed + offset + s).collect()
}

pub fn synth(cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> Result<SynthOutput> {
    let procs = cfg.validate_synth()?;
    let mut jobs = Vec::new();
    let mut processes = Vec::new();
    for (k, (spec, proc)) in cfg.synth.processes.iter().zip(&procs).enumerate() {
        let seeds = process_seeds(cfg, k);
        let truth = true_graph(proc, 0.0);
        processes.push(ProcessEntry {
            id: spec.id.clone(),
            series: truth.joint_order.clone(),
            noise_std: proc.noise_std(),
            order: proc.order(),
            seeds: seeds.clone(),
            edges: truth.edges().iter().map(|&(a, b)| [truth.joint_order[a].clone(), truth.joint_order[b].clone()]).collect(),
        });
        jobs.extend(seeds.into_iter().map(|s| (spec.id.clone(), proc.with_seed(s), s)));
    }
    let frames = cfg.synth.frames;
    let cycles: Vec<GaitCycle> = pool.install(|| {
        jobs.par_iter().map(|(id, proc, _)| generate_cycle(proc, frames, id)).collect::<Result<Vec<_>, _>>()
    })?;
    let entries = jobs
        .iter()
        .zip(&cycles)
        .map(|((id, _, seed), c)| CycleEntry {
            file: cycle_file_name(id, &seed.to_string(), 0),
            subject: id.clone(),
            sequence: seed.to_string(),
            cycle: 0,
            source: format!("synth:{id}"),
            source_frames: frames,
            frames,
            joints: c.joints.clone(),
        })
        .collect();
    Ok(SynthOutput { manifest: CycleManifest { fixed_length: frames, cycles: entries, processes }, cycles })
}

pub fn run_synth(cfg: &PipelineConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    cfg.validate_synth()?;
    let out = require_out(cfg)?;
    let pool = worker_pool(cfg.jobs)?;
    let result = synth(cfg, &pool)?;
    archive::write_cycle_archive(&out, &result.manifest, &result.cycles)?;
    Ok(result)
}
