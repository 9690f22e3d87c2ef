use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ggm::config::{Overrides, PipelineConfig};
use ggm::error::{exit, Error};
use ggm::pipeline;

#[derive(Parser)]
#[command(name = "ggm", version, about = "Granger causal gait graphs: ingest, extract, compare, evaluate")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    lag: Option<usize>,
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Distance function, e.g. `total`, `kyfan1`, or `all`.
    #[arg(long, global = true)]
    distance: Option<String>,
    /// Resampled gait-cycle length in frames.
    #[arg(long, global = true)]
    fixed_length: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use one minus the Jaccard ratio as the Jaccard distance.
    #[arg(long, global = true)]
    jaccard_complement: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Segment ASF/AMC files or trajectory tables into a gait-cycle archive.
    Ingest { inputs: Vec<PathBuf> },
    /// Fit one causal graph per cycle of an archive.
    Extract { input: Option<PathBuf> },
    /// Pairwise distance matrices of a graph archive.
    Dist { input: Option<PathBuf> },
    /// CCR, Davies-Bouldin and Dunn index under all eleven distances.
    Eval { input: Option<PathBuf> },
    /// Percent decrease of each metric when a joint pair is removed.
    Ablate {
        input: Option<PathBuf>,
        /// `ccr`, `dbi`, `di` or `all`.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Write a labeled archive simulated from autoregressive processes.
    Synth,
}

fn configure(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let c = &cli.common;
    let mut o = Overrides {
        lag: c.lag,
        lambda_max: c.lambda_max,
        folds: c.folds,
        distance: c.distance.clone(),
        fixed_length: c.fixed_length,
        jobs: c.jobs,
        seed: c.seed,
        jaccard_complement: c.jaccard_complement,
        out: c.out.clone(),
        ..Overrides::default()
    };
    match &cli.command {
        Command::Ingest { inputs } => o.inputs = inputs.clone(),
        Command::Extract { input } | Command::Dist { input } | Command::Eval { input } => {
            o.inputs = input.iter().cloned().collect()
        }
        Command::Ablate { input, metric } => {
            o.inputs = input.iter().cloned().collect();
            o.metric = metric.clone();
        }
        Command::Synth => {}
    }
    cfg.apply(&o)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, Error> {
    let cfg = configure(cli)?;
    match cli.command {
        Command::Ingest { .. } => {
            let r = pipeline::run_ingest(&cfg)?;
            println!("{} cycles, {} warnings", r.cycles.len(), r.warnings.len());
        }
        Command::Extract { .. } => {
            let r = pipeline::run_extract(&cfg)?;
            println!("{} graphs, {} failures", r.docs.len(), r.failures.len());
            return Ok(r.status());
        }
        Command::Dist { .. } => {
            let r = pipeline::run_dist(&cfg)?;
            println!("{} distance matrices", r.len());
        }
        Command::Eval { .. } => {
            for r in pipeline::run_eval(&cfg)? {
                println!("{:<16} ccr {:.4}  dbi {:.4}  di {:.4}", r.distance.to_string(), r.ccr, r.dbi, r.di);
            }
        }
        Command::Ablate { .. } => {
            for m in pipeline::run_ablate(&cfg)? {
                println!("{} under {}: baseline {}", m.metric, m.distance, m.baseline_value);
            }
        }
        Command::Synth => {
            let r = pipeline::run_synth(&cfg)?;
            println!("{} cycles from {} processes", r.cycles.len(), r.manifest.processes.len());
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
