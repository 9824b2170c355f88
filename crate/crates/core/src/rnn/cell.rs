//! A single LSTM layer: gate arithmetic, the unrolled forward pass over one
//! window, and its reverse-mode gradient.
//!
//! Every gate acts on the concatenation `z = [h_{t-1}, x_t]`:
//!
//! ```text
//! f_t = sigmoid(W_f z + b_f)
//! i_t = sigmoid(W_i z + b_i)
//! g_t = tanh(W_c z + b_c)          candidate memory
//! c_t = f_t * c_{t-1} + i_t * g_t
//! o_t = sigmoid(W_o z + b_o)
//! h_t = o_t * tanh(c_t)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim("matrix data", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights and biases of one LSTM layer. Each weight matrix has shape
/// `hidden x (hidden + input)`; the first `hidden` columns act on `h_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let m = || Matrix::zeros(hidden, hidden + input);
        LstmParams {
            w_f: m(),
            w_i: m(),
            w_c: m(),
            w_o: m(),
            b_f: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_f.len()
    }

    pub fn input_size(&self) -> usize {
        self.w_f.cols() - self.w_f.rows()
    }

    /// Checks the shared-shape invariants.
    pub fn validate(&self) -> Result<()> {
        let h = self.b_f.len();
        let cols = self.w_f.cols();
        if cols <= h {
            return Err(Error::InvalidArgument(format!(
                "weight matrix has {cols} columns, needs more than hidden={h}"
            )));
        }
        for w in [&self.w_f, &self.w_i, &self.w_c, &self.w_o] {
            if w.rows() != h {
                return Err(Error::dim("gate weight rows", h, w.rows()));
            }
            if w.cols() != cols {
                return Err(Error::dim("gate weight columns", cols, w.cols()));
            }
        }
        for b in [&self.b_i, &self.b_c, &self.b_o] {
            if b.len() != h {
                return Err(Error::dim("gate bias length", h, b.len()));
            }
        }
        if self.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("LSTM parameter".into()));
        }
        Ok(())
    }

    /// Parameter blocks in canonical order: `W_f, W_i, W_c, W_o, b_f, b_i,
    /// b_c, b_o`.
    pub fn slices(&self) -> [&[f64]; 8] {
        [
            self.w_f.as_slice(),
            self.w_i.as_slice(),
            self.w_c.as_slice(),
            self.w_o.as_slice(),
            &self.b_f,
            &self.b_i,
            &self.b_c,
            &self.b_o,
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 8] {
        [
            self.w_f.as_mut_slice(),
            self.w_i.as_mut_slice(),
            self.w_c.as_mut_slice(),
            self.w_o.as_mut_slice(),
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
        ]
    }

    pub(crate) const BLOCK_NAMES: [&'static str; 8] =
        ["w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o"];
}

/// Gate activations of one time step, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStep {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

fn gate_into(w: &Matrix, b: &[f64], z: &[f64], out: &mut [f64], act: fn(f64) -> f64) {
    for (r, o) in out.iter_mut().enumerate() {
        *o = act(b[r] + dot(w.row(r), z));
    }
}

/// Writes one step's gates, cell state and hidden state.
#[allow(clippy::too_many_arguments)]
#[inline]
fn step_kernel(
    p: &LstmParams,
    z: &[f64],
    c_prev: &[f64],
    f: &mut [f64],
    i: &mut [f64],
    g: &mut [f64],
    o: &mut [f64],
    c: &mut [f64],
    tanh_c: &mut [f64],
    h: &mut [f64],
) {
    gate_into(&p.w_f, &p.b_f, z, f, sigmoid);
    gate_into(&p.w_i, &p.b_i, z, i, sigmoid);
    gate_into(&p.w_c, &p.b_c, z, g, f64::tanh);
    gate_into(&p.w_o, &p.b_o, z, o, sigmoid);
    for k in 0..c.len() {
        c[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = c[k].tanh();
        h[k] = o[k] * tanh_c[k];
    }
}

/// One LSTM step.
pub fn lstm_cell_forward(
    x_t: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmParams,
) -> Result<CellStep> {
    let hidden = p.hidden();
    if h_prev.len() != hidden {
        return Err(Error::dim("h_prev", hidden, h_prev.len()));
    }
    if c_prev.len() != hidden {
        return Err(Error::dim("c_prev", hidden, c_prev.len()));
    }
    if x_t.len() != p.input_size() {
        return Err(Error::dim("x_t", p.input_size(), x_t.len()));
    }
    let mut z = h_prev.to_vec();
    z.extend_from_slice(x_t);
    let mut s = CellStep {
        forget: vec![0.0; hidden],
        input: vec![0.0; hidden],
        candidate: vec![0.0; hidden],
        output: vec![0.0; hidden],
        c: vec![0.0; hidden],
        h: vec![0.0; hidden],
    };
    let mut tanh_c = vec![0.0; hidden];
    step_kernel(
        p,
        &z,
        c_prev,
        &mut s.forget,
        &mut s.input,
        &mut s.candidate,
        &mut s.output,
        &mut s.c,
        &mut tanh_c,
        &mut s.h,
    );
    Ok(s)
}

/// Activations of every step of an unrolled window, stored as flat
/// `steps x hidden` arrays.
#[derive(Debug, Clone, Default)]
pub struct SequenceCache {
    steps: usize,
    hidden: usize,
    zdim: usize,
    z: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

impl SequenceCache {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Hidden state after step `t` (0-based).
    pub fn h(&self, t: usize) -> &[f64] {
        &self.h[t * self.hidden..(t + 1) * self.hidden]
    }

    pub fn c(&self, t: usize) -> &[f64] {
        &self.c[t * self.hidden..(t + 1) * self.hidden]
    }

    pub fn last_h(&self) -> &[f64] {
        self.h(self.steps - 1)
    }

    pub fn last_c(&self) -> &[f64] {
        self.c(self.steps - 1)
    }

    fn resize(&mut self, steps: usize, hidden: usize, zdim: usize) {
        self.steps = steps;
        self.hidden = hidden;
        self.zdim = zdim;
        self.z.resize(steps * zdim, 0.0);
        for v in [
            &mut self.f,
            &mut self.i,
            &mut self.g,
            &mut self.o,
            &mut self.c,
            &mut self.tanh_c,
            &mut self.h,
        ] {
            v.resize(steps * hidden, 0.0);
        }
    }
}

/// Order in which a window is fed to a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reversed,
}

/// Runs the layer over `window` (`steps x input`, row-major) from
/// `h_0 = c_0 = 0`, filling `cache`.
pub fn sequence_forward_into(
    window: &[f64],
    p: &LstmParams,
    direction: Direction,
    cache: &mut SequenceCache,
) -> Result<()> {
    let input = p.input_size();
    let hidden = p.hidden();
    if window.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    if window.len() % input != 0 {
        return Err(Error::dim("window length (multiple of input)", input, window.len()));
    }
    let steps = window.len() / input;
    let zdim = hidden + input;
    cache.resize(steps, hidden, zdim);

    let zeros = vec![0.0; hidden];
    let SequenceCache {
        z,
        f,
        i,
        g,
        o,
        c,
        tanh_c,
        h,
        ..
    } = cache;
    for t in 0..steps {
        let src = match direction {
            Direction::Forward => t,
            Direction::Reversed => steps - 1 - t,
        };
        let (h_done, h_rest) = h.split_at_mut(t * hidden);
        let (c_done, c_rest) = c.split_at_mut(t * hidden);
        let h_prev = if t == 0 {
            &zeros[..]
        } else {
            &h_done[(t - 1) * hidden..]
        };
        let c_prev = if t == 0 {
            &zeros[..]
        } else {
            &c_done[(t - 1) * hidden..]
        };
        let zt = &mut z[t * zdim..(t + 1) * zdim];
        zt[..hidden].copy_from_slice(h_prev);
        zt[hidden..].copy_from_slice(&window[src * input..(src + 1) * input]);
        let r = t * hidden..(t + 1) * hidden;
        step_kernel(
            p,
            zt,
            c_prev,
            &mut f[r.clone()],
            &mut i[r.clone()],
            &mut g[r.clone()],
            &mut o[r.clone()],
            &mut c_rest[..hidden],
            &mut tanh_c[r],
            &mut h_rest[..hidden],
        );
    }
    Ok(())
}

/// Unrolls the layer over `window`; returns every hidden state and the final
/// cell state.
pub fn lstm_sequence_forward(window: &[f64], p: &LstmParams) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut cache = SequenceCache::default();
    sequence_forward_into(window, p, Direction::Forward, &mut cache)?;
    let hs = (0..cache.steps()).map(|t| cache.h(t).to_vec()).collect();
    Ok((hs, cache.last_c().to_vec()))
}

/// Accumulates into `grads` the gradient of a loss whose only dependence on
/// this layer is through the final hidden state, given `dh_last = dL/dh_T`.
pub(crate) fn sequence_backward(
    p: &LstmParams,
    cache: &SequenceCache,
    dh_last: &[f64],
    grads: &mut LstmParams,
) {
    let hidden = cache.hidden;
    let zdim = cache.zdim;
    let mut dh = dh_last.to_vec();
    let mut dc = vec![0.0; hidden];
    let mut da = [
        vec![0.0; hidden],
        vec![0.0; hidden],
        vec![0.0; hidden],
        vec![0.0; hidden],
    ];
    let mut dz = vec![0.0; zdim];

    for t in (0..cache.steps).rev() {
        let r = t * hidden..(t + 1) * hidden;
        let f = &cache.f[r.clone()];
        let i = &cache.i[r.clone()];
        let g = &cache.g[r.clone()];
        let o = &cache.o[r.clone()];
        let tanh_c = &cache.tanh_c[r];
        for k in 0..hidden {
            let c_prev = if t == 0 {
                0.0
            } else {
                cache.c[(t - 1) * hidden + k]
            };
            let d_o = dh[k] * tanh_c[k];
            dc[k] += dh[k] * o[k] * (1.0 - tanh_c[k] * tanh_c[k]);
            da[0][k] = dc[k] * c_prev * f[k] * (1.0 - f[k]);
            da[1][k] = dc[k] * g[k] * i[k] * (1.0 - i[k]);
            da[2][k] = dc[k] * i[k] * (1.0 - g[k] * g[k]);
            da[3][k] = d_o * o[k] * (1.0 - o[k]);
            dc[k] *= f[k];
        }

        let z = &cache.z[t * zdim..(t + 1) * zdim];
        dz.iter_mut().for_each(|v| *v = 0.0);
        let weights = [&p.w_f, &p.w_i, &p.w_c, &p.w_o];
        let [gw_f, gw_i, gw_c, gw_o, gb_f, gb_i, gb_c, gb_o] = grads.slices_mut();
        let gws = [gw_f, gw_i, gw_c, gw_o];
        let gbs = [gb_f, gb_i, gb_c, gb_o];
        for (((w, gw), gb), d) in weights.into_iter().zip(gws).zip(gbs).zip(&da) {
            for k in 0..hidden {
                let dk = d[k];
                if dk == 0.0 {
                    continue;
                }
                gb[k] += dk;
                let grow = &mut gw[k * zdim..(k + 1) * zdim];
                let wrow = w.row(k);
                for j in 0..zdim {
                    grow[j] += dk * z[j];
                    dz[j] += dk * wrow[j];
                }
            }
        }
        dh.copy_from_slice(&dz[..hidden]);
    }
}
