//! Experiment harness for the gwrnet hierarchy: incremental training with
//! cumulative error tracking, parameter sweeps, data loss robustness and
//! delay compensation runs. Every run writes CSV tables and a manifest.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod delay_demo;
pub mod error;
pub mod incremental;
pub mod metrics;
pub mod output;
pub mod seeds;
pub mod sweeps;

pub use commands::{execute, Command};
pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
