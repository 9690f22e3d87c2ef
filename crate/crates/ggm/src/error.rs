use std::path::{Path, PathBuf};

use ggm_core::distance::DistanceError;
use ggm_core::evaluation::EvalError;
use ggm_core::granger::GrangerError;
use ggm_core::mocap::MocapError;
use ggm_core::synth::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed ASF at line {line}: {message}")]
    MalformedAsf { line: usize, message: String },
    #[error("malformed AMC at line {line}: {message}")]
    MalformedAmc { line: usize, message: String },
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error("malformed JSON: {0}")]
    MalformedJson(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Mocap { path: PathBuf, source: MocapError },
    #[error("cycle {id}: {source}")]
    Granger { id: String, source: GrangerError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

fn distance_is_numerical(e: &DistanceError) -> bool {
    matches!(e, DistanceError::EigenFailure(_))
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => exit::CONFIG,
            Error::Granger { source, .. } if source.is_numerical() => exit::NUMERICAL,
            Error::Eval(EvalError::Distance(e)) if distance_is_numerical(e) => exit::NUMERICAL,
            Error::Synth(SynthError::NonStationary { .. }) => exit::CONFIG,
            _ => exit::DATA,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, source: ParseError) -> Self {
        Error::Parse { path: path.to_path_buf(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
