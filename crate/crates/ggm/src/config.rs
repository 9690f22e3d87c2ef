//! Pipeline configuration: a TOML document with `[ggm]`, `[pipeline]` and
//! `[synth]` tables, overridden by command-line flags.
//!
//! ```toml
//! [ggm]
//! lag = 1
//! lambda_max = 5.0
//!
//! [pipeline]
//! fixed_length = 156
//! distance = "total"
//! jobs = 4
//!
//! [[synth.process]]
//! id = "chain"
//! kind = "chain"
//! series = 5
//! ```

use std::path::{Path, PathBuf};

use ggm_core::distance::DistanceId;
use ggm_core::evaluation::Metric;
use ggm_core::granger::{GgmConfig, Penalty};
use ggm_core::linalg::Matrix;
use ggm_core::synth::VarProcess;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::trajectory::read_text;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    ggm: GgmSection,
    pipeline: PipelineSection,
    synth: SynthSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GgmSection {
    lag: Option<usize>,
    lambda_max: Option<f64>,
    cv_folds: Option<usize>,
    lambda_grid_size: Option<usize>,
    zero_threshold: Option<f64>,
    weight_floor: Option<f64>,
    penalty: Option<Penalty>,
    max_sweeps: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PipelineSection {
    fixed_length: Option<usize>,
    distance: Option<String>,
    metric: Option<String>,
    jaccard_complement: Option<bool>,
    jobs: Option<usize>,
    seed: Option<u64>,
    frame_rate: Option<f64>,
    prototype: Option<bool>,
    inputs: Vec<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SynthSection {
    frames: Option<usize>,
    count: Option<usize>,
    process: Vec<ProcessSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Chain,
    WhiteNoise,
    Explicit,
}

/// One synthetic class. `coeffs` (one `series × series` matrix per lag) is
/// used only by the `explicit` kind.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub id: String,
    pub kind: ProcessKind,
    #[serde(default = "default_series")]
    pub series: usize,
    #[serde(default = "default_coefficient")]
    pub coefficient: f64,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default)]
    pub coeffs: Vec<Vec<Vec<f64>>>,
    /// Added to the base seed; defaults to 1000 × the process index.
    pub seed_offset: Option<u64>,
}

fn default_series() -> usize {
    5
}

fn default_coefficient() -> f64 {
    0.6
}

fn default_noise() -> f64 {
    0.1
}

impl ProcessSpec {
    pub fn chain(id: &str) -> Self {
        Self {
            id: id.into(),
            kind: ProcessKind::Chain,
            series: default_series(),
            coefficient: default_coefficient(),
            noise_std: default_noise(),
            coeffs: Vec::new(),
            seed_offset: None,
        }
    }

    pub fn white_noise(id: &str) -> Self {
        Self { kind: ProcessKind::WhiteNoise, ..Self::chain(id) }
    }

    /// The process with its seed left at zero.
    pub fn build(&self) -> Result<VarProcess> {
        let proc = match self.kind {
            ProcessKind::Chain => VarProcess::chain(self.series, self.coefficient, self.noise_std, 3, 0),
            ProcessKind::WhiteNoise => VarProcess::white_noise(self.series, self.noise_std, 3, 0),
            ProcessKind::Explicit => {
                let lags = self
                    .coeffs
                    .iter()
                    .map(|m| {
                        if m.is_empty() || m.iter().any(|r| r.len() != m.len()) {
                            return Err(Error::Config(format!("process `{}`: coefficient matrices must be square", self.id)));
                        }
                        Ok(Matrix::from_rows(m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                VarProcess::new(lags, self.noise_std, 3, 0)
            }
        };
        proc.map_err(|e| Error::Config(format!("process `{}`: {e}", self.id)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub frames: usize,
    /// Samples per process.
    pub count: usize,
    pub processes: Vec<ProcessSpec>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { frames: 200, count: 20, processes: vec![ProcessSpec::chain("chain"), ProcessSpec::white_noise("null")] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub ggm: GgmConfig,
    pub fixed_length: usize,
    /// `None` runs every distance (dist) or each metric's default (ablate).
    pub distance: Option<DistanceId>,
    /// `None` ablates all three metrics.
    pub metric: Option<Metric>,
    pub jaccard_complement: bool,
    pub jobs: usize,
    pub seed: u64,
    /// Frame rate assumed for AMC input.
    pub frame_rate: f64,
    /// Drive forward kinematics with the mean skeleton of all ASF inputs.
    pub prototype: bool,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ggm: GgmConfig::default(),
            fixed_length: ggm_core::mocap::DEFAULT_FIXED_LENGTH,
            distance: None,
            metric: None,
            jaccard_complement: false,
            jobs: 1,
            seed: 0,
            frame_rate: 120.0,
            prototype: true,
            inputs: Vec::new(),
            out: None,
            synth: SynthConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub lag: Option<usize>,
    pub lambda_max: Option<f64>,
    pub folds: Option<usize>,
    pub distance: Option<String>,
    pub metric: Option<String>,
    pub fixed_length: Option<usize>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub jaccard_complement: bool,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

fn parse_distance(s: &str) -> Result<Option<DistanceId>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| Error::Config(format!("{e}")))
}

fn parse_metric(s: &str) -> Result<Option<Metric>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| Error::Config(format!("{e}")))
}

impl PipelineConfig {
    /// Parses a TOML document; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        let g = file.ggm;
        let ggm = &mut cfg.ggm;
        ggm.lag = g.lag.unwrap_or(ggm.lag);
        ggm.lambda_max = g.lambda_max.unwrap_or(ggm.lambda_max);
        ggm.cv_folds = g.cv_folds.unwrap_or(ggm.cv_folds);
        ggm.lambda_grid_size = g.lambda_grid_size.unwrap_or(ggm.lambda_grid_size);
        ggm.zero_threshold = g.zero_threshold.unwrap_or(ggm.zero_threshold);
        ggm.weight_floor = g.weight_floor.unwrap_or(ggm.weight_floor);
        ggm.penalty = g.penalty.unwrap_or(ggm.penalty);
        ggm.max_sweeps = g.max_sweeps.unwrap_or(ggm.max_sweeps);
        ggm.tolerance = g.tolerance.unwrap_or(ggm.tolerance);

        let p = file.pipeline;
        cfg.fixed_length = p.fixed_length.unwrap_or(cfg.fixed_length);
        if let Some(d) = p.distance {
            cfg.distance = parse_distance(&d)?;
        }
        if let Some(m) = p.metric {
            cfg.metric = parse_metric(&m)?;
        }
        cfg.jaccard_complement = p.jaccard_complement.unwrap_or(false);
        cfg.jobs = p.jobs.unwrap_or(cfg.jobs);
        cfg.seed = p.seed.unwrap_or(cfg.seed);
        cfg.frame_rate = p.frame_rate.unwrap_or(cfg.frame_rate);
        cfg.prototype = p.prototype.unwrap_or(cfg.prototype);
        cfg.inputs = p.inputs.into_iter().map(|i| base.join(i)).collect();
        cfg.out = p.out.map(|o| base.join(o));

        let s = file.synth;
        cfg.synth.frames = s.frames.unwrap_or(cfg.synth.frames);
        cfg.synth.count = s.count.unwrap_or(cfg.synth.count);
        if !s.process.is_empty() {
            cfg.synth.processes = s.process;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = o.lag {
            self.ggm.lag = v;
        }
        if let Some(v) = o.lambda_max {
            self.ggm.lambda_max = v;
        }
        if let Some(v) = o.folds {
            self.ggm.cv_folds = v;
        }
        if let Some(d) = &o.distance {
            self.distance = parse_distance(d)?;
        }
        if let Some(m) = &o.metric {
            self.metric = parse_metric(m)?;
        }
        if let Some(v) = o.fixed_length {
            self.fixed_length = v;
        }
        if let Some(v) = o.jobs {
            self.jobs = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.jaccard_complement {
            self.jaccard_complement = true;
        }
        if !o.inputs.is_empty() {
            self.inputs = o.inputs.clone();
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        Ok(())
    }

    /// Checks every numeric field; touches nothing on disk.
    pub fn validate(&self) -> Result<()> {
        self.ggm.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.fixed_length <= self.ggm.lag + 1 {
            return Err(Error::Config(format!(
                "fixed_length {} must exceed lag + 1 = {}",
                self.fixed_length,
                self.ggm.lag + 1
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return Err(Error::Config("frame_rate must be positive".into()));
        }
        if let Some(DistanceId::KyFan(0)) = self.distance {
            return Err(Error::Config("Ky-Fan order must be at least 1".into()));
        }
        Ok(())
    }

    /// Validation specific to `synth`: every process must be stationary and
    /// long enough to simulate.
    pub fn validate_synth(&self) -> Result<Vec<VarProcess>> {
        let s = &self.synth;
        if s.count == 0 {
            return Err(Error::Config("synth count must be at least 1".into()));
        }
        if s.processes.is_empty() {
            return Err(Error::Config("no synthetic processes configured".into()));
        }
        let mut ids: Vec<&str> = s.processes.iter().map(|p| p.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("synthetic process ids must be unique".into()));
        }
        let procs = s.processes.iter().map(ProcessSpec::build).collect::<Result<Vec<_>>>()?;
        for (spec, proc) in s.processes.iter().zip(&procs) {
            if s.frames <= 10 * proc.order() {
                return Err(Error::Config(format!("process `{}` needs more than {} frames", spec.id, 10 * proc.order())));
            }
            if s.frames <= self.ggm.lag + 1 {
                return Err(Error::Config("synth frames must exceed lag + 1".into()));
            }
        }
        Ok(procs)
    }

    pub fn eval_options(&self) -> ggm_core::evaluation::EvalOptions {
        ggm_core::evaluation::EvalOptions { jaccard_complement: self.jaccard_complement }
    }
}
