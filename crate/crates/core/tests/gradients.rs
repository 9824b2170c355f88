//! Analytic BPTT gradients against central finite differences.

use loadcast::preprocess::MinMaxScaler;
use loadcast::rnn::{Arch, DropoutMask, Parameters, RecurrentModel, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;
/// Guards the relative error against a 0/0 on exactly-zero coordinates.
const FLOOR: f64 = 1e-10;

fn random_model(arch: Arch, hidden: usize, window: usize, rng: &mut ChaCha8Rng) -> RecurrentModel {
    let mut params = Parameters::zeros(arch, hidden, 1);
    for block in params.slices_mut() {
        for v in block.iter_mut() {
            *v = rng.random_range(-0.8..0.8);
        }
    }
    let scaler = MinMaxScaler::fit(&[0.0, 1.0]).unwrap();
    RecurrentModel::new(arch, window, params, 0.0, scaler).unwrap()
}

fn batch_data(window: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, f64)> {
    (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..window).map(|_| rng.random_range(-1.0..1.5)).collect();
            (w, rng.random_range(-1.0..1.0))
        })
        .collect()
}

fn loss(model: &RecurrentModel, batch: &[Sample<'_>], masks: Option<&[DropoutMask]>) -> f64 {
    model.bptt_gradients(batch, masks).unwrap().0
}

/// Largest relative error over every coordinate of every block.
fn max_relative_error(model: &RecurrentModel, batch: &[Sample<'_>], masks: Option<&[DropoutMask]>) -> (f64, String) {
    let (_, grads) = model.bptt_gradients(batch, masks).unwrap();
    let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
    let names = model.params.block_names();
    let mut worst = (0.0, String::new());
    let mut probe = model.clone();
    for (b, block) in analytic.iter().enumerate() {
        for (i, &a) in block.iter().enumerate() {
            let orig = model.params.slices()[b][i];
            probe.params.slices_mut()[b][i] = orig + EPS;
            let up = loss(&probe, batch, masks);
            probe.params.slices_mut()[b][i] = orig - EPS;
            let down = loss(&probe, batch, masks);
            probe.params.slices_mut()[b][i] = orig;
            let numeric = (up - down) / (2.0 * EPS);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            if rel > worst.0 {
                worst = (rel, format!("{}[{i}]: analytic {a:e}, numeric {numeric:e}", names[b]));
            }
        }
    }
    worst
}

#[test]
fn bptt_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..24 {
        let arch = if case % 2 == 0 { Arch::Lstm } else { Arch::Blstm };
        let hidden = 1 + case % 4;
        let window = 1 + (case / 2) % 5;
        let model = random_model(arch, hidden, window, &mut rng);
        let data = batch_data(window, 3, &mut rng);
        let batch: Vec<Sample<'_>> = data.iter().map(|(w, t)| (w.as_slice(), *t)).collect();
        let (err, at) = max_relative_error(&model, &batch, None);
        assert!(err <= TOL, "case {case} ({arch}, hidden {hidden}, window {window}): {err:e} at {at}");
    }
}

#[test]
fn bptt_with_dropout_masks_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..8 {
        let arch = if case % 2 == 0 { Arch::Lstm } else { Arch::Blstm };
        let model = random_model(arch, 3, 4, &mut rng);
        let data = batch_data(4, 2, &mut rng);
        let batch: Vec<Sample<'_>> = data.iter().map(|(w, t)| (w.as_slice(), *t)).collect();
        let masks: Vec<DropoutMask> = (0..batch.len())
            .map(|_| {
                (0..model.head_width())
                    .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { 1.0 / 0.7 })
                    .collect()
            })
            .collect();
        let (err, at) = max_relative_error(&model, &batch, Some(&masks));
        assert!(err <= TOL, "case {case}: {err:e} at {at}");
    }
}

#[test]
fn zero_error_gives_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for arch in Arch::ALL {
        let model = random_model(arch, 3, 4, &mut rng);
        let w: Vec<f64> = (0..4).map(|i| f64::from(i) * 0.2).collect();
        let target = model.predict_scaled(&w).unwrap();
        let (l, grads) = model.bptt_gradients(&[(&w, target)], None).unwrap();
        assert_eq!(l, 0.0);
        assert!(grads.slices().iter().all(|s| s.iter().all(|&g| g == 0.0)));
    }
}

#[test]
fn backward_cell_gradient_equals_lstm_on_reversed_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let mut bi = random_model(Arch::Blstm, 3, 5, &mut rng);
        bi.params.head.w_fwd.iter_mut().for_each(|w| *w = 0.0);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target = rng.random_range(-1.0..1.0);
        let (_, g_bi) = bi.bptt_gradients(&[(&w, target)], None).unwrap();

        let mut uni_params = Parameters::zeros(Arch::Lstm, 3, 1);
        uni_params.forward = bi.params.backward.clone().unwrap();
        uni_params.head.w_fwd = bi.params.head.w_bwd.clone().unwrap();
        uni_params.head.bias = bi.params.head.bias;
        let uni = RecurrentModel::new(Arch::Lstm, 5, uni_params, 0.0, bi.scaler).unwrap();
        let reversed: Vec<f64> = w.iter().rev().copied().collect();
        let (_, g_uni) = uni.bptt_gradients(&[(&reversed, target)], None).unwrap();

        let gb = g_bi.backward.unwrap();
        for (a, b) in gb.slices().iter().zip(g_uni.forward.slices().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
        assert!(g_bi.forward.slices().iter().all(|s| s.iter().all(|&g| g == 0.0)));
    }
}
