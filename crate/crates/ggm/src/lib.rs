//! File formats, motion-capture ingestion and the batch pipeline built on
//! [`ggm_core`].
//!
//! The stages mirror the command-line tool: `ingest` turns ASF/AMC files or
//! canonical trajectory tables into an archive of gait cycles, `extract` fits
//! one causal graph per cycle, `dist`, `eval` and `ablate` compare graphs, and
//! `synth` writes labeled archives from known autoregressive processes.

pub mod archive;
pub mod asf;
pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod trajectory;

pub use ggm_core;

pub use config::{Overrides, PipelineConfig};
pub use error::{Error, ParseError};
