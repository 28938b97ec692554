//! Experiment harness and command-line front end for `dpsynth-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, SizeSpec, TruthSpec};
pub use error::{BenchError, Result};
pub use experiment::{plan, run_experiment, TrialOutcome, TrialRecord};
pub use report::emit_reports;
