use loadcast::rnn::{checkpoint_to_string, Arch, Hyper};
use loadcast::tscv::{run_fold, tscv_splits, ExperimentRecord, FoldPlan};
use rayon::prelude::*;

use super::{fmt_f64, load_ingested, Failures, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::fsutil::{write_atomic, write_csv_atomic};
use crate::layout::Layout;

/// Cross-validates every selected (dataset, architecture) pair, writing one
/// checkpoint and loss log per fold plus the record and timing tables.
pub fn train(cfg: &ExperimentConfig, layout: &Layout, opts: &RunOptions) -> CliResult<()> {
    let hyper = cfg.hyper_with_seed(opts.seed.unwrap_or(cfg.seed));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", opts.workers)))?;
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
            let result = tscv_splits(data.train_cv.len(), cfg.k)
                .map_err(CliError::from)
                .and_then(|plans| {
                    train_arch(layout, &d.id, arch, &hyper, data.train_cv.values(), &plans, &pool)
                });
            if let Err(e) = result {
                failures.record(&d.id, Some(arch), e);
            }
        }
    }
    failures.finish(())
}

fn train_arch(
    layout: &Layout,
    id: &str,
    arch: Arch,
    hyper: &Hyper,
    values: &[f64],
    plans: &[FoldPlan],
    pool: &rayon::ThreadPool,
) -> CliResult<()> {
    let k = plans.len();
    let results: Vec<CliResult<ExperimentRecord>> = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| {
                let rec = run_fold(values, plan, arch, hyper, id)?;
                write_atomic(
                    &layout.checkpoint(id, arch, plan.fold_id),
                    checkpoint_to_string(&rec.model)?.as_bytes(),
                )?;
                write_csv_atomic(
                    &layout.loss_log(id, arch, plan.fold_id),
                    &["epoch", "loss"],
                    rec.epoch_losses
                        .iter()
                        .enumerate()
                        .map(|(e, l)| [(e + 1).to_string(), fmt_f64(*l)]),
                )?;
                println!(
                    "train {id} {arch} fold {}/{k}: train {} test {} test mse {:.6} ({:.1}s)",
                    plan.fold_id,
                    rec.train_len,
                    rec.test_len,
                    rec.fold_test_mse,
                    rec.wall_time_secs
                );
                Ok(rec)
            })
            .collect()
    });
    let records = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    write_csv_atomic(
        &layout.records(id, arch),
        &[
            "dataset",
            "arch",
            "fold_id",
            "train_len",
            "test_len",
            "fold_test_mse",
            "fold_test_rmse",
            "final_train_loss",
        ],
        records.iter().map(|r| {
            [
                r.dataset.clone(),
                r.arch.name().to_string(),
                r.fold_id.to_string(),
                r.train_len.to_string(),
                r.test_len.to_string(),
                fmt_f64(r.fold_test_mse),
                fmt_f64(r.fold_test_rmse()),
                r.final_train_loss.map(fmt_f64).unwrap_or_default(),
            ]
        }),
    )?;
    write_csv_atomic(
        &layout.timing(id, arch),
        &["dataset", "arch", "fold_id", "wall_time_secs"],
        records.iter().map(|r| {
            [
                r.dataset.clone(),
                r.arch.name().to_string(),
                r.fold_id.to_string(),
                format!("{:.3}", r.wall_time_secs),
            ]
        }),
    )?;
    Ok(())
}
