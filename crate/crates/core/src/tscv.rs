//! Expanding-window time-series cross-validation and holdout evaluation of
//! the resulting fold models.

use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, MetricReport, MetricTable};
use crate::preprocess::{frame_targets, frame_windows, MinMaxScaler};
use crate::rnn::{predict_holdout, train, Arch, Hyper, Provenance, RecurrentModel};
use crate::series_io::TimeSeries;

/// One fold: train on `train`, test on the block right after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    /// 1-based.
    pub fold_id: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Splits `n` points into `k` expanding-window folds.
///
/// `test_size = floor(n / (k + 1))`; fold `i` trains on
/// `[0, n - (k - i + 1) * test_size)` and tests on the next `test_size`
/// points, so the remainder `n mod (k + 1)` lands in fold 1's training prefix
/// and the last fold's test block ends at `n`.
pub fn tscv_splits(n: usize, k: usize) -> Result<Vec<FoldPlan>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let test_size = n / (k + 1);
    if test_size == 0 {
        return Err(Error::InvalidArgument(format!(
            "{n} points are too few for {k} folds"
        )));
    }
    Ok((1..=k)
        .map(|i| {
            let train_end = n - (k - i + 1) * test_size;
            FoldPlan {
                fold_id: i,
                train: 0..train_end,
                test: train_end..train_end + test_size,
            }
        })
        .collect())
}

/// Result of training one fold.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub arch: Arch,
    pub fold_id: usize,
    pub train_len: usize,
    pub test_len: usize,
    /// Scaled-space MSE on the fold's test block.
    pub fold_test_mse: f64,
    pub final_train_loss: Option<f64>,
    pub epoch_losses: Vec<f64>,
    pub model: RecurrentModel,
    pub wall_time_secs: f64,
}

impl ExperimentRecord {
    pub fn fold_test_rmse(&self) -> f64 {
        self.fold_test_mse.sqrt()
    }
}

/// Fits the scaler on the fold's training slice only, trains, and scores
/// one-step predictions over the test block. The fold seed is
/// `hyper.seed + fold_id`.
pub fn run_fold(
    values: &[f64],
    plan: &FoldPlan,
    arch: Arch,
    hyper: &Hyper,
    dataset: &str,
) -> Result<ExperimentRecord> {
    let wrap = |e: Error| Error::Fold {
        fold: plan.fold_id,
        source: Box::new(e),
    };
    let start = Instant::now();
    if plan.test.end > values.len() || plan.train.end != plan.test.start || plan.train.start != 0 {
        return Err(wrap(Error::InvalidArgument(format!(
            "fold ranges {:?}/{:?} do not fit a series of {}",
            plan.train,
            plan.test,
            values.len()
        ))));
    }
    if plan.train.len() <= hyper.window {
        return Err(wrap(Error::InvalidArgument(format!(
            "training slice of {} points is too short for window {}",
            plan.train.len(),
            hyper.window
        ))));
    }

    let train_raw = &values[plan.train.clone()];
    let scaler = MinMaxScaler::fit(train_raw).map_err(wrap)?;
    let scaled: Vec<f64> = scaler.transform_all(&values[..plan.test.end]);
    let train_set = frame_windows(&scaled[plan.train.clone()], hyper.window).map_err(wrap)?;
    let test_set =
        frame_targets(&scaled, hyper.window, plan.test.start, plan.test.end).map_err(wrap)?;

    let fold_hyper = Hyper {
        seed: hyper.seed.wrapping_add(plan.fold_id as u64),
        ..*hyper
    };
    let outcome = train(
        arch,
        &train_set,
        scaler,
        &fold_hyper,
        Provenance {
            dataset: dataset.to_string(),
            fold: plan.fold_id,
        },
    )
    .map_err(wrap)?;
    let fold_test_mse = outcome.model.mse(test_set.iter()).map_err(wrap)?;

    Ok(ExperimentRecord {
        dataset: dataset.to_string(),
        arch,
        fold_id: plan.fold_id,
        train_len: plan.train.len(),
        test_len: plan.test.len(),
        fold_test_mse,
        final_train_loss: outcome.epoch_losses.last().copied(),
        epoch_losses: outcome.epoch_losses,
        model: outcome.model,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Trains one model per fold, sequentially.
pub fn run_tscv(
    ts_cv: &TimeSeries,
    arch: Arch,
    hyper: &Hyper,
    k: usize,
    dataset: &str,
) -> Result<Vec<ExperimentRecord>> {
    let plans = tscv_splits(ts_cv.len(), k)?;
    plans
        .iter()
        .map(|plan| run_fold(ts_cv.values(), plan, arch, hyper, dataset))
        .collect()
}

/// Holdout predictions and metrics of every fold model.
#[derive(Debug, Clone)]
pub struct HoldoutEvaluation {
    pub predictions: Vec<Vec<f64>>,
    pub table: MetricTable,
}

impl HoldoutEvaluation {
    pub fn reports(&self) -> &[MetricReport] {
        &self.table.rows
    }

    /// Index of the model whose NRMSE is closest to the median NRMSE.
    pub fn typical_model(&self) -> usize {
        let median = self.table.summary[1].median;
        let mut best = 0;
        for (i, r) in self.table.rows.iter().enumerate() {
            if (r.nrmse - median).abs() < (self.table.rows[best].nrmse - median).abs() {
                best = i;
            }
        }
        best
    }
}

/// One-step predictions of every model over `holdout`, conditioned on the
/// observed series, with `history` supplying the context before it.
pub fn evaluate_holdout_all(
    models: &[RecurrentModel],
    history: &TimeSeries,
    holdout: &TimeSeries,
) -> Result<HoldoutEvaluation> {
    if models.is_empty() {
        return Err(Error::InvalidArgument("no models to evaluate".into()));
    }
    let full = history.concat(holdout)?;
    let start = history.len();
    let mut predictions = Vec::with_capacity(models.len());
    let mut rows = Vec::with_capacity(models.len());
    for (i, model) in models.iter().enumerate() {
        if model.window > start {
            return Err(Error::InvalidArgument(format!(
                "model {} needs {} points of history, only {start} available",
                i + 1,
                model.window
            )));
        }
        let pred = predict_holdout(model, &full, start)?;
        rows.push(compute_metrics(holdout.values(), &pred)?);
        predictions.push(pred);
    }
    Ok(HoldoutEvaluation {
        predictions,
        table: MetricTable::new(rows)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_split() {
        let f = tscv_splits(22, 10).unwrap();
        assert_eq!(f.len(), 10);
        assert_eq!((f[0].train.clone(), f[0].test.clone()), (0..2, 2..4));
        assert_eq!((f[9].train.clone(), f[9].test.clone()), (0..20, 20..22));
    }

    #[test]
    fn household_sized_split() {
        let f = tscv_splits(203_801, 10).unwrap();
        assert_eq!(f[0].test.len(), 18_527);
        assert_eq!(f[0].train.len(), 18_531);
        assert_eq!(f[9].train.len(), 185_274);
        assert_eq!(f[9].test.end, 203_801);
    }

    #[test]
    fn too_small() {
        assert!(tscv_splits(10, 10).is_err());
        assert!(tscv_splits(100, 1).is_err());
    }

    proptest! {
        #[test]
        fn split_invariants(n in 3usize..5000, k in 2usize..15) {
            prop_assume!(n / (k + 1) > 0);
            let f = tscv_splits(n, k).unwrap();
            let ts = n / (k + 1);
            prop_assert_eq!(f.len(), k);
            for (i, p) in f.iter().enumerate() {
                prop_assert_eq!(p.fold_id, i + 1);
                prop_assert_eq!(p.test.len(), ts);
                prop_assert_eq!(p.train.end, p.test.start);
                if i + 1 < f.len() {
                    prop_assert!(f[i + 1].train.end > p.train.end);
                    prop_assert_eq!(f[i + 1].test.start, p.test.end);
                }
            }
            prop_assert_eq!(f[0].test.start, n - k * ts);
            prop_assert_eq!(f[k - 1].test.end, n);
        }
    }
}
