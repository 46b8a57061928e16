//! Configuration and pipeline orchestration behind the `pacmc` binary.

pub mod config;
pub mod pipeline;

pub use config::{ExperimentConfig, Plan};
pub use pipeline::{Stage, StageError};
