//! Config-driven pipeline for loadcast experiments:
//! ingest, exploratory analysis, cross-validated training, holdout
//! evaluation, statistical comparison and reporting.
//!
//! Stages talk to each other only through files under the output
//! directory, so any stage can be rerun on its own once its inputs exist.

pub mod commands;
pub mod config;
pub mod error;
pub mod fsutil;
pub mod layout;

pub use config::{DatasetConfig, ExperimentConfig, HyperConfig};
pub use error::{CliError, CliResult, StageFailure};
pub use layout::Layout;
