//! Granger causal graphs of human gait.
//!
//! Joint trajectories from motion capture are cut into gait cycles, a
//! penalized vector autoregression per joint yields a directed graph of which
//! joints Granger-cause which, and the graphs are compared with matrix
//! distances to discriminate between subjects.
//!
//! The crate is `no_std` with `alloc`. File formats, parsers and the command
//! line live in the `ggm` crate.

#![no_std]
extern crate alloc;

pub mod distance;
pub mod evaluation;
pub mod granger;
pub mod graph;
pub mod lasso;
pub mod linalg;
pub mod mocap;
pub mod num;
pub mod synth;

pub use distance::{DistanceError, DistanceId};
pub use evaluation::{EvalError, EvalReport, LabeledFeatureSet, Metric};
pub use granger::{compute_ggm, fit_ggm, GgmConfig, GrangerError};
pub use graph::CausalGraph;
pub use linalg::Matrix;
pub use mocap::{GaitCycle, MocapError, MotionSequence, Skeleton};
pub use synth::{VarProcess, SynthError};
