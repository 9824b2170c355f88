use loadcast::metrics::MetricTable;
use loadcast::rnn::{checkpoint_from_str, Arch, RecurrentModel};
use loadcast::series_io::format_timestamp;
use loadcast::tscv::evaluate_holdout_all;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, load_ingested, Failures, Ingested, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::fsutil::{read_to_string, write_atomic, write_csv_atomic};
use crate::layout::Layout;

/// Machine-readable holdout results for one (dataset, architecture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSummary {
    pub dataset: String,
    pub arch: Arch,
    /// 1-based fold id of the model whose NRMSE is closest to the median.
    pub typical_model: usize,
    pub table: MetricTable,
}

/// Scores every fold model on the holdout month and writes the metric
/// table, the NRMSE list for box plots and an actual-vs-predicted overlay.
pub fn evaluate(cfg: &ExperimentConfig, layout: &Layout, opts: &RunOptions) -> CliResult<()> {
    let mut failures = Failures::default();
    for d in cfg.select_datasets(&opts.datasets)? {
        let data = match load_ingested(layout, &d.id) {
            Ok(data) => data,
            Err(e) => {
                failures.record(&d.id, None, e);
                continue;
            }
        };
        for arch in cfg.select_archs(&opts.archs) {
            if let Err(e) = evaluate_arch(layout, &d.id, arch, cfg.k, &data) {
                failures.record(&d.id, Some(arch), e);
            }
        }
    }
    failures.finish(())
}

fn load_models(layout: &Layout, id: &str, arch: Arch, k: usize) -> CliResult<Vec<RecurrentModel>> {
    let mut missing = Vec::new();
    let mut models = Vec::with_capacity(k);
    for fold in 1..=k {
        let path = layout.checkpoint(id, arch, fold);
        match read_to_string(&path) {
            Ok(text) => {
                let m = checkpoint_from_str(&text)?;
                if m.arch != arch {
                    return Err(CliError::Config(format!(
                        "{} holds a {} model",
                        path.display(),
                        m.arch
                    )));
                }
                models.push(m);
            }
            Err(CliError::Missing(p)) => missing.push(p),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Missing(format!("checkpoints {}", missing.join(", "))));
    }
    Ok(models)
}

fn evaluate_arch(layout: &Layout, id: &str, arch: Arch, k: usize, data: &Ingested) -> CliResult<()> {
    let models = load_models(layout, id, arch, k)?;
    let eval = evaluate_holdout_all(&models, &data.train_cv, &data.holdout)?;
    let typical = eval.typical_model();

    let mut buf = Vec::new();
    eval.table.write_csv(&mut buf)?;
    write_atomic(&layout.metrics_csv(id, arch), &buf)?;

    let summary = HoldoutSummary {
        dataset: id.to_string(),
        arch,
        typical_model: typical + 1,
        table: eval.table.clone(),
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Core(e.into()))?;
    json.push('\n');
    write_atomic(&layout.metrics_json(id, arch), json.as_bytes())?;

    write_csv_atomic(
        &layout.nrmse_boxplot(id, arch),
        &["model", "nrmse"],
        eval.reports()
            .iter()
            .enumerate()
            .map(|(i, r)| [(i + 1).to_string(), fmt_f64(r.nrmse)]),
    )?;

    let holdout = &data.holdout;
    let pred = &eval.predictions[typical];
    write_csv_atomic(
        &layout.overlay(id, arch),
        &["timestamp", "actual", "predicted"],
        holdout.values().iter().zip(pred).enumerate().map(|(i, (a, p))| {
            [format_timestamp(holdout.timestamp(i)), fmt_f64(*a), fmt_f64(*p)]
        }),
    )?;
    let avg = eval.table.summary[1].average;
    println!(
        "evaluate {id} {arch}: {} models, average NRMSE {avg:.5}, typical model {}",
        models.len(),
        typical + 1
    );
    Ok(())
}
