//! A small LSTM learns a noiseless sine well enough to beat persistence.

use chrono::{Duration, NaiveDate};
use loadcast::preprocess::{frame_windows, MinMaxScaler};
use loadcast::rnn::{predict_holdout, train, Arch, Hyper, Provenance};
use loadcast::series_io::{PowerUnit, TimeSeries};

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn sine_is_learned() {
    let n = 500;
    let holdout = 50;
    let values: Vec<f64> = (0..n)
        .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 50.0).sin())
        .collect();
    let series = TimeSeries::new(
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        Duration::minutes(10),
        values.clone(),
        PowerUnit::KW,
    )
    .unwrap();
    let split = n - holdout;
    let scaler = MinMaxScaler::fit(&values[..split]).unwrap();
    let scaled = scaler.transform_all(&values[..split]);
    let hyper = Hyper {
        hidden: 16,
        epochs: 200,
        batch: 32,
        dropout: 0.0,
        window: 20,
        seed: 7,
        ..Hyper::default()
    };
    let data = frame_windows(&scaled, hyper.window).unwrap();
    let out = train(Arch::Lstm, &data, scaler, &hyper, Provenance::default()).unwrap();
    let train_mse = out.model.mse(data.iter()).unwrap();
    assert!(train_mse <= 1e-3, "training MSE {train_mse}");

    let pred = predict_holdout(&out.model, &series, split).unwrap();
    let actual = &values[split..];
    let persistence = &values[split - 1..n - 1];
    let model_rmse = rmse(actual, &pred);
    let naive_rmse = rmse(actual, persistence);
    assert!(
        model_rmse <= 0.8 * naive_rmse,
        "model {model_rmse} vs persistence {naive_rmse}"
    );
}
