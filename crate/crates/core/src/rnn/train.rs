//! Minibatch training with RMSProp and one-step-ahead holdout prediction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::init::init_parameters;
use super::model::{Arch, DropoutMask, Provenance, RecurrentModel, Sample, Workspace};
use super::optim::{OptimState, RmsProp};
use crate::error::{Error, Result};
use crate::preprocess::{frame_targets, MinMaxScaler, WindowedDataset};
use crate::series_io::TimeSeries;

/// Training hyperparameters. The defaults are the full-scale settings
/// (100 units, 100 epochs, batch 32, dropout 0.3, window 90, RMSProp).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyper {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub dropout: f64,
    pub window: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        let opt = RmsProp::default();
        Hyper {
            hidden: 100,
            epochs: 100,
            batch: 32,
            dropout: 0.3,
            window: 90,
            lr: opt.lr,
            rho: opt.rho,
            eps: opt.eps,
            seed: 0,
        }
    }
}

impl Hyper {
    pub fn optimizer(&self) -> RmsProp {
        RmsProp {
            lr: self.lr,
            rho: self.rho,
            eps: self.eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.hidden == 0 {
            return bad("hidden size must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.rho) || !(self.eps > 0.0) {
            return bad("optimizer constants must satisfy lr > 0, 0 <= rho < 1, eps > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RecurrentModel,
    /// Mean training loss (dropout on) of each epoch.
    pub epoch_losses: Vec<f64>,
}

fn dropout_mask<R: Rng + ?Sized>(width: usize, rate: f64, rng: &mut R) -> DropoutMask {
    let keep = 1.0 / (1.0 - rate);
    (0..width)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect()
}

/// Trains a fresh model on scaled windows. All randomness (initialization,
/// shuffling, dropout) comes from one generator seeded with `hyper.seed`, so
/// identical inputs give bitwise-identical models.
pub fn train(
    arch: Arch,
    data: &WindowedDataset,
    scaler: MinMaxScaler,
    hyper: &Hyper,
    provenance: Provenance,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if data.window_len() != hyper.window {
        return Err(Error::dim("dataset window", hyper.window, data.window_len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let params = init_parameters(arch, hyper.hidden, 1, &mut rng);
    let mut model = RecurrentModel::new(arch, hyper.window, params, hyper.dropout, scaler)?;
    model.seed = hyper.seed;
    model.provenance = provenance;

    let opt = hyper.optimizer();
    let mut state = OptimState::for_shapes(model.params.slices());
    let mut ws = Workspace::default();
    let mut grads = model.params.zeros_like();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut batch: Vec<Sample<'_>> = Vec::with_capacity(hyper.batch);
    let mut masks: Vec<DropoutMask> = Vec::with_capacity(hyper.batch);

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for (b, chunk) in order.chunks(hyper.batch).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| (data.input(i), data.target(i))));
            masks.clear();
            if hyper.dropout > 0.0 {
                masks.extend(
                    (0..chunk.len()).map(|_| dropout_mask(model.head_width(), hyper.dropout, &mut rng)),
                );
            }
            for g in grads.slices_mut() {
                g.fill(0.0);
            }
            let loss = model
                .accumulate_gradients(
                    &batch,
                    (hyper.dropout > 0.0).then_some(masks.as_slice()),
                    &mut ws,
                    &mut grads,
                )
                .map_err(|e| match e {
                    Error::NonFinite(m) => {
                        Error::NonFinite(format!("{m} at epoch {epoch}, batch {b}"))
                    }
                    other => other,
                })?;
            sse += loss * chunk.len() as f64;
            opt.step(&mut model.params.slices_mut(), &grads.slices(), &mut state)?;
        }
        let epoch_loss = sse / data.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        epoch_losses.push(epoch_loss);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

/// One-step-ahead predictions, in physical units, for every point of
/// `full_series` from `holdout_start` on. Each prediction sees the observed
/// previous `window` values scaled with the model's own scaler.
pub fn predict_holdout(
    model: &RecurrentModel,
    full_series: &TimeSeries,
    holdout_start: usize,
) -> Result<Vec<f64>> {
    if holdout_start < model.window {
        return Err(Error::InvalidArgument(format!(
            "holdout starts at {holdout_start}, needs {} points of history",
            model.window
        )));
    }
    let scaled = model.scaler.transform_all(full_series.values());
    let windows = frame_targets(&scaled, model.window, holdout_start, scaled.len())?;
    let mut ws = Workspace::default();
    windows
        .iter()
        .map(|(w, _)| {
            model
                .predict_scaled_with(w, &mut ws)
                .map(|z| model.scaler.inverse_transform(z))
        })
        .collect()
}
