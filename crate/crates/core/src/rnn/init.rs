//! Weight initialization: Glorot-uniform input and head weights, orthogonal
//! recurrent weights, zero biases except a forget-gate bias of one.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::cell::LstmParams;
use super::model::{Arch, DenseHead, Parameters};

fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// `rows x cols` matrix (`rows >= cols`) with orthonormal columns, row-major.
fn orthonormal_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    assert!(rows >= cols);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while q.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| StandardNormal.sample(rng)).collect();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, u)| *x -= d * u);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for (c, col) in q.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            out[r * cols + c] = x;
        }
    }
    out
}

pub(crate) fn init_layer<R: Rng + ?Sized>(hidden: usize, input: usize, rng: &mut R) -> LstmParams {
    let mut p = LstmParams::zeros(hidden, input);
    let limit = glorot_limit(input, 4 * hidden);
    let uniform = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    let recurrent = orthonormal_columns(4 * hidden, hidden, rng);
    for (g, w) in [&mut p.w_f, &mut p.w_i, &mut p.w_c, &mut p.w_o]
        .into_iter()
        .enumerate()
    {
        for r in 0..hidden {
            let src = &recurrent[(g * hidden + r) * hidden..(g * hidden + r + 1) * hidden];
            let row = w.row_mut(r);
            row[..hidden].copy_from_slice(src);
            for x in &mut row[hidden..] {
                *x = uniform.sample(rng);
            }
        }
    }
    p.b_f.iter_mut().for_each(|b| *b = 1.0);
    p
}

/// Fresh parameters for `arch`.
pub fn init_parameters<R: Rng + ?Sized>(
    arch: Arch,
    hidden: usize,
    input: usize,
    rng: &mut R,
) -> Parameters {
    let forward = init_layer(hidden, input, rng);
    let backward = (arch == Arch::Blstm).then(|| init_layer(hidden, input, rng));
    let fan_in = if arch == Arch::Blstm { 2 * hidden } else { hidden };
    let limit = glorot_limit(fan_in, 1);
    let uniform = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    let mut sample = |n: usize| (0..n).map(|_| uniform.sample(rng)).collect::<Vec<_>>();
    let w_fwd = sample(hidden);
    let w_bwd = (arch == Arch::Blstm).then(|| sample(hidden));
    Parameters {
        forward,
        backward,
        head: DenseHead {
            w_fwd,
            w_bwd,
            bias: 0.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recurrent_blocks_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = 5;
        let q = orthonormal_columns(4 * h, h, &mut rng);
        for a in 0..h {
            for b in 0..h {
                let d: f64 = (0..4 * h).map(|r| q[r * h + a] * q[r * h + b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12, "({a},{b}) = {d}");
            }
        }
    }

    #[test]
    fn biases_and_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = init_parameters(Arch::Blstm, 8, 1, &mut rng);
        p.validate().unwrap();
        let layer = p.backward.as_ref().unwrap();
        assert!(layer.b_f.iter().all(|&b| b == 1.0));
        assert!(layer.b_i.iter().chain(&layer.b_c).chain(&layer.b_o).all(|&b| b == 0.0));
        let limit = glorot_limit(1, 32);
        for r in 0..8 {
            assert!(layer.w_o.get(r, 8).abs() <= limit);
        }
        assert_eq!(p.head.bias, 0.0);
    }
}
