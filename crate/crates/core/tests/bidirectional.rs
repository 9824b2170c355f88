//! With the backward head weights zeroed, a BLSTM predicts exactly what an
//! LSTM with the same forward parameters predicts.

use loadcast::preprocess::MinMaxScaler;
use loadcast::rnn::{init_parameters, Arch, Parameters, RecurrentModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn blstm_with_silent_backward_head_equals_lstm() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let scaler = MinMaxScaler::fit(&[0.0, 1.0]).unwrap();
    let window = 12;
    let mut bi_params = init_parameters(Arch::Blstm, 6, 1, &mut rng);
    for v in bi_params.head.w_fwd.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    bi_params.head.bias = 0.17;
    bi_params.head.w_bwd.as_mut().unwrap().iter_mut().for_each(|w| *w = 0.0);

    let uni_params = Parameters {
        forward: bi_params.forward.clone(),
        backward: None,
        head: loadcast::rnn::DenseHead {
            w_fwd: bi_params.head.w_fwd.clone(),
            w_bwd: None,
            bias: bi_params.head.bias,
        },
    };
    let bi = RecurrentModel::new(Arch::Blstm, window, bi_params, 0.0, scaler).unwrap();
    let uni = RecurrentModel::new(Arch::Lstm, window, uni_params, 0.0, scaler).unwrap();

    for _ in 0..50 {
        let w: Vec<f64> = (0..window).map(|_| rng.random_range(0.0..1.0)).collect();
        let a = bi.predict_scaled(&w).unwrap();
        let b = uni.predict_scaled(&w).unwrap();
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}
