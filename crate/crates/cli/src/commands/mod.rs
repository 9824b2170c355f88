//! The six pipeline stages.

mod compare;
mod eda;
mod evaluate;
mod ingest;
mod report;
mod train;

use std::path::PathBuf;

use loadcast::rnn::Arch;
use loadcast::series_io::{read_series_csv, DatasetManifest, TimeSeries};

use crate::error::{CliError, CliResult, StageFailure};
use crate::fsutil::read_to_string;
use crate::layout::Layout;

pub use compare::{compare, score_matrix_from_eval};
pub use eda::{eda, quarterly_summary, QuarterSummary};
pub use evaluate::{evaluate, HoldoutSummary};
pub use ingest::ingest;
pub use report::{report, ReportOutcome};
pub use train::train;

/// Command-line selections shared by the stages.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Restrict to these dataset ids (all when empty).
    pub datasets: Vec<String>,
    /// Restrict to these architectures (the configured list when empty).
    pub archs: Vec<Arch>,
    pub seed: Option<u64>,
    /// Fold-level worker threads; 0 or 1 runs folds sequentially.
    pub workers: usize,
    /// Compare on one block per (dataset, fold) instead of per dataset.
    pub per_fold_blocks: bool,
    /// Score table to compare instead of evaluation outputs.
    pub scores: Option<PathBuf>,
    pub alpha: Option<f64>,
}

/// Ingested series of one dataset, read back from the output directory.
pub(crate) struct Ingested {
    pub manifest: DatasetManifest,
    pub train_cv: TimeSeries,
    pub holdout: TimeSeries,
}

pub(crate) fn load_ingested(layout: &Layout, id: &str) -> CliResult<Ingested> {
    let path = layout.manifest(id);
    let manifest: DatasetManifest = serde_json::from_str(&read_to_string(&path)?)
        .map_err(|e| CliError::Core(e.into()))?;
    let read = |p: PathBuf| -> CliResult<TimeSeries> {
        let text = read_to_string(&p)?;
        Ok(read_series_csv(text.as_bytes(), manifest.unit)?)
    };
    Ok(Ingested {
        train_cv: read(layout.train_cv(id))?,
        holdout: read(layout.holdout(id))?,
        manifest,
    })
}

/// Collects per-job failures so one bad dataset does not stop the others.
#[derive(Debug, Default)]
pub(crate) struct Failures(Vec<StageFailure>);

impl Failures {
    pub fn record(&mut self, dataset: &str, arch: Option<Arch>, err: CliError) {
        eprintln!(
            "error: {dataset}{}: {err}",
            arch.map(|a| format!(" {a}")).unwrap_or_default()
        );
        self.0.push(StageFailure {
            dataset: dataset.to_string(),
            arch: arch.map(|a| a.name().to_string()),
            message: err.to_string(),
        });
    }

    pub fn finish<T>(self, value: T) -> CliResult<T> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            Err(CliError::Partial(self.0))
        }
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    v.to_string()
}
