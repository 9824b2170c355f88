use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cell::{dot, sequence_backward, sequence_forward_into, Direction, LstmParams, SequenceCache};
use crate::error::{Error, Result};
use crate::preprocess::MinMaxScaler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Lstm,
    Blstm,
}

impl Arch {
    pub const ALL: [Arch; 2] = [Arch::Lstm, Arch::Blstm];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Lstm => "lstm",
            Arch::Blstm => "blstm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Arch::Lstm => "LSTM",
            Arch::Blstm => "BLSTM",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" => Ok(Arch::Lstm),
            "blstm" | "bilstm" => Ok(Arch::Blstm),
            other => Err(Error::InvalidArgument(format!("unknown architecture {other:?}"))),
        }
    }
}

/// Linear output layer `y = w_fwd . h_fwd + w_bwd . h_bwd + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHead {
    pub w_fwd: Vec<f64>,
    /// Present only for the bidirectional architecture.
    pub w_bwd: Option<Vec<f64>>,
    pub bias: f64,
}

impl DenseHead {
    pub fn zeros(hidden: usize, bidirectional: bool) -> Self {
        DenseHead {
            w_fwd: vec![0.0; hidden],
            w_bwd: bidirectional.then(|| vec![0.0; hidden]),
            bias: 0.0,
        }
    }
}

/// Scaled one-step prediction from the final hidden state(s).
pub fn predict_head(h_fwd: &[f64], h_bwd: Option<&[f64]>, head: &DenseHead) -> Result<f64> {
    if h_fwd.len() != head.w_fwd.len() {
        return Err(Error::dim("forward hidden state", head.w_fwd.len(), h_fwd.len()));
    }
    let mut y = head.bias + dot(&head.w_fwd, h_fwd);
    match (h_bwd, &head.w_bwd) {
        (Some(h), Some(w)) => {
            if h.len() != w.len() {
                return Err(Error::dim("backward hidden state", w.len(), h.len()));
            }
            y += dot(w, h);
        }
        (None, None) => {}
        (Some(_), None) => {
            return Err(Error::InvalidArgument(
                "backward state given to a unidirectional head".into(),
            ))
        }
        (None, Some(_)) => {
            return Err(Error::InvalidArgument(
                "bidirectional head needs a backward state".into(),
            ))
        }
    }
    Ok(y)
}

/// Final hidden states of a bidirectional pass: the forward layer reads the
/// window in time order, the backward layer reads it reversed.
pub fn blstm_forward(
    window: &[f64],
    fwd: &LstmParams,
    bwd: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if fwd.hidden() != bwd.hidden() {
        return Err(Error::dim("backward hidden size", fwd.hidden(), bwd.hidden()));
    }
    let mut cache = SequenceCache::default();
    sequence_forward_into(window, fwd, Direction::Forward, &mut cache)?;
    let h_fwd = cache.last_h().to_vec();
    sequence_forward_into(window, bwd, Direction::Reversed, &mut cache)?;
    Ok((h_fwd, cache.last_h().to_vec()))
}

/// All trainable parameters. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub forward: LstmParams,
    pub backward: Option<LstmParams>,
    pub head: DenseHead,
}

impl Parameters {
    pub fn zeros(arch: Arch, hidden: usize, input: usize) -> Self {
        let bi = arch == Arch::Blstm;
        Parameters {
            forward: LstmParams::zeros(hidden, input),
            backward: bi.then(|| LstmParams::zeros(hidden, input)),
            head: DenseHead::zeros(hidden, bi),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let arch = if self.backward.is_some() {
            Arch::Blstm
        } else {
            Arch::Lstm
        };
        Self::zeros(arch, self.forward.hidden(), self.forward.input_size())
    }

    /// Every parameter block in a fixed order (forward layer, backward
    /// layer, head weights, head bias).
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.forward.slices().into();
        if let Some(b) = &self.backward {
            out.extend(b.slices());
        }
        out.push(&self.head.w_fwd);
        if let Some(w) = &self.head.w_bwd {
            out.push(w);
        }
        out.push(std::slice::from_ref(&self.head.bias));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.forward.slices_mut().into();
        if let Some(b) = &mut self.backward {
            out.extend(b.slices_mut());
        }
        out.push(&mut self.head.w_fwd);
        if let Some(w) = &mut self.head.w_bwd {
            out.push(w);
        }
        out.push(std::slice::from_mut(&mut self.head.bias));
        out
    }

    /// Names matching [`Parameters::slices`].
    pub fn block_names(&self) -> Vec<String> {
        let mut out: Vec<String> = LstmParams::BLOCK_NAMES
            .iter()
            .map(|n| format!("forward.{n}"))
            .collect();
        if self.backward.is_some() {
            out.extend(LstmParams::BLOCK_NAMES.iter().map(|n| format!("backward.{n}")));
        }
        out.push("head.w_fwd".into());
        if self.head.w_bwd.is_some() {
            out.push("head.w_bwd".into());
        }
        out.push("head.bias".into());
        out
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        self.forward.validate()?;
        let h = self.forward.hidden();
        if let Some(b) = &self.backward {
            b.validate()?;
            if b.hidden() != h || b.input_size() != self.forward.input_size() {
                return Err(Error::dim("backward layer hidden size", h, b.hidden()));
            }
        }
        if self.head.w_fwd.len() != h {
            return Err(Error::dim("head forward weights", h, self.head.w_fwd.len()));
        }
        match (&self.backward, &self.head.w_bwd) {
            (Some(_), Some(w)) if w.len() != h => {
                return Err(Error::dim("head backward weights", h, w.len()))
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "backward layer and backward head weights must both be present or absent"
                        .into(),
                ))
            }
            _ => {}
        }
        if self.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("model parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub fold: usize,
}

/// A trained (or freshly initialized) one-layer forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentModel {
    pub arch: Arch,
    pub window: usize,
    pub params: Parameters,
    pub dropout_rate: f64,
    pub scaler: MinMaxScaler,
    pub seed: u64,
    pub provenance: Provenance,
}

/// One training example: a scaled window and its scaled next value.
pub type Sample<'a> = (&'a [f64], f64);

/// Inverted-dropout multipliers on the head input for one sample: each
/// entry is `0` or `1 / (1 - rate)`. Length is `hidden` for LSTM and
/// `2 * hidden` (forward then backward) for BLSTM.
pub type DropoutMask = Vec<f64>;

/// Per-thread scratch buffers for forward/backward passes.
#[derive(Debug, Default)]
pub struct Workspace {
    fwd: SequenceCache,
    bwd: SequenceCache,
}

impl RecurrentModel {
    /// Wraps `params` after checking they agree with `arch`.
    pub fn new(
        arch: Arch,
        window: usize,
        params: Parameters,
        dropout_rate: f64,
        scaler: MinMaxScaler,
    ) -> Result<Self> {
        params.validate()?;
        if (arch == Arch::Blstm) != params.backward.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} parameters do not match architecture {arch}",
                if params.backward.is_some() {
                    "bidirectional"
                } else {
                    "unidirectional"
                }
            )));
        }
        if window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate {dropout_rate} outside [0, 1)"
            )));
        }
        Ok(RecurrentModel {
            arch,
            window,
            params,
            dropout_rate,
            scaler,
            seed: 0,
            provenance: Provenance::default(),
        })
    }

    pub fn hidden(&self) -> usize {
        self.params.forward.hidden()
    }

    pub fn input_size(&self) -> usize {
        self.params.forward.input_size()
    }

    /// Width of the head input (`hidden` or `2 * hidden`).
    pub fn head_width(&self) -> usize {
        match self.arch {
            Arch::Lstm => self.hidden(),
            Arch::Blstm => 2 * self.hidden(),
        }
    }

    fn forward_into(&self, window: &[f64], ws: &mut Workspace) -> Result<()> {
        sequence_forward_into(window, &self.params.forward, Direction::Forward, &mut ws.fwd)?;
        if let Some(b) = &self.params.backward {
            sequence_forward_into(window, b, Direction::Reversed, &mut ws.bwd)?;
        }
        Ok(())
    }

    fn head_output(&self, ws: &Workspace, mask: Option<&[f64]>) -> f64 {
        let h = self.hidden();
        let head = &self.params.head;
        let hf = ws.fwd.last_h();
        let mut y = head.bias;
        match mask {
            None => {
                y += dot(&head.w_fwd, hf);
                if let Some(w) = &head.w_bwd {
                    y += dot(w, ws.bwd.last_h());
                }
            }
            Some(m) => {
                for k in 0..h {
                    y += head.w_fwd[k] * m[k] * hf[k];
                }
                if let Some(w) = &head.w_bwd {
                    let hb = ws.bwd.last_h();
                    for k in 0..h {
                        y += w[k] * m[h + k] * hb[k];
                    }
                }
            }
        }
        y
    }

    /// Scaled prediction for one scaled window, with dropout off.
    pub fn predict_scaled(&self, window: &[f64]) -> Result<f64> {
        let mut ws = Workspace::default();
        self.predict_scaled_with(window, &mut ws)
    }

    pub fn predict_scaled_with(&self, window: &[f64], ws: &mut Workspace) -> Result<f64> {
        if window.len() != self.window * self.input_size() {
            return Err(Error::dim(
                "window length",
                self.window * self.input_size(),
                window.len(),
            ));
        }
        self.forward_into(window, ws)?;
        Ok(self.head_output(ws, None))
    }

    /// Mean squared error over `samples` in scaled space, dropout off.
    pub fn mse(&self, samples: impl IntoIterator<Item = (impl AsRef<[f64]>, f64)>) -> Result<f64> {
        let mut ws = Workspace::default();
        let mut sse = 0.0;
        let mut n = 0usize;
        for (w, t) in samples {
            let e = self.predict_scaled_with(w.as_ref(), &mut ws)? - t;
            sse += e * e;
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        Ok(sse / n as f64)
    }

    /// Batch-mean squared error and its exact gradient with respect to every
    /// parameter. `masks`, when given, holds one dropout mask per sample.
    pub fn bptt_gradients(
        &self,
        batch: &[Sample<'_>],
        masks: Option<&[DropoutMask]>,
    ) -> Result<(f64, Parameters)> {
        let mut ws = Workspace::default();
        let mut grads = self.params.zeros_like();
        let loss = self.accumulate_gradients(batch, masks, &mut ws, &mut grads)?;
        Ok((loss, grads))
    }

    /// Adds the batch gradient into `grads` (which the caller zeroes) and
    /// returns the batch loss.
    pub(crate) fn accumulate_gradients(
        &self,
        batch: &[Sample<'_>],
        masks: Option<&[DropoutMask]>,
        ws: &mut Workspace,
        grads: &mut Parameters,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        if let Some(m) = masks {
            if m.len() != batch.len() {
                return Err(Error::dim("dropout masks", batch.len(), m.len()));
            }
            if let Some(bad) = m.iter().find(|m| m.len() != self.head_width()) {
                return Err(Error::dim("dropout mask width", self.head_width(), bad.len()));
            }
        }
        let h = self.hidden();
        let scale = 2.0 / batch.len() as f64;
        let mut sse = 0.0;
        let mut dh = vec![0.0; h];

        for (s, &(window, target)) in batch.iter().enumerate() {
            let mask = masks.map(|m| m[s].as_slice());
            if window.len() != self.window * self.input_size() {
                return Err(Error::dim(
                    "window length",
                    self.window * self.input_size(),
                    window.len(),
                ));
            }
            self.forward_into(window, ws)?;
            let y = self.head_output(ws, mask);
            let err = y - target;
            sse += err * err;
            let dy = scale * err;

            let head = &self.params.head;
            grads.head.bias += dy;
            let hf = ws.fwd.last_h();
            for k in 0..h {
                let m = mask.map_or(1.0, |m| m[k]);
                grads.head.w_fwd[k] += dy * m * hf[k];
                dh[k] = dy * m * head.w_fwd[k];
            }
            sequence_backward(&self.params.forward, &ws.fwd, &dh, &mut grads.forward);

            if let (Some(bp), Some(wb)) = (&self.params.backward, &head.w_bwd) {
                let hb = ws.bwd.last_h();
                let gwb = grads.head.w_bwd.as_mut().expect("shapes match");
                for k in 0..h {
                    let m = mask.map_or(1.0, |m| m[h + k]);
                    gwb[k] += dy * m * hb[k];
                    dh[k] = dy * m * wb[k];
                }
                let gb = grads.backward.as_mut().expect("shapes match");
                sequence_backward(bp, &ws.bwd, &dh, gb);
            }
        }
        let loss = sse / batch.len() as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("batch loss {loss}")));
        }
        Ok(loss)
    }
}

/// Mean of squared differences.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::dim("target length", pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty prediction vector".into()));
    }
    let sse: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(sse / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::cell::lstm_sequence_forward;

    #[test]
    fn head_values() {
        let zero = DenseHead::zeros(2, false);
        assert_eq!(predict_head(&[0.3, 0.4], None, &zero).unwrap(), 0.0);

        let bias = DenseHead {
            bias: 1.25,
            ..DenseHead::zeros(2, true)
        };
        assert_eq!(predict_head(&[0.3, 0.4], Some(&[1.0, 2.0]), &bias).unwrap(), 1.25);

        let head = DenseHead {
            w_fwd: vec![0.5, -1.0],
            w_bwd: Some(vec![2.0, 0.25]),
            bias: 0.1,
        };
        // 0.5*0.2 - 1*0.4 + 2*(-0.3) + 0.25*0.8 + 0.1 = -0.6
        let y = predict_head(&[0.2, 0.4], Some(&[-0.3, 0.8]), &head).unwrap();
        assert!((y + 0.6).abs() < 1e-15);

        assert!(predict_head(&[0.2], Some(&[0.1, 0.1]), &head).is_err());
        assert!(predict_head(&[0.2, 0.4], None, &head).is_err());
    }

    #[test]
    fn mse_values() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!((mse_loss(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse_loss(&[], &[]).is_err());
    }

    #[test]
    fn blstm_zero_and_palindrome() {
        let z = LstmParams::zeros(3, 1);
        let (a, b) = blstm_forward(&[1.0, 2.0, 3.0], &z, &z).unwrap();
        assert_eq!(a, vec![0.0; 3]);
        assert_eq!(b, vec![0.0; 3]);

        let mut p = LstmParams::zeros(2, 1);
        for (k, v) in p.w_f.as_mut_slice().iter_mut().enumerate() {
            *v = 0.1 * k as f64 - 0.2;
        }
        p.w_c.as_mut_slice().copy_from_slice(&[0.3, -0.5, 0.7, 0.2, 0.1, 0.9]);
        p.b_o = vec![0.4, -0.1];
        let (a, b) = blstm_forward(&[0.5, -1.0, 2.0, -1.0, 0.5], &p, &p).unwrap();
        assert_eq!(a, b);

        let other = LstmParams::zeros(3, 1);
        assert!(blstm_forward(&[1.0], &p, &other).is_err());
    }

    #[test]
    fn backward_direction_reads_reversed_window() {
        let mut p = LstmParams::zeros(1, 1);
        p.w_i.as_mut_slice().copy_from_slice(&[0.4, 1.1]);
        p.w_c.as_mut_slice().copy_from_slice(&[-0.3, 0.8]);
        p.w_o.as_mut_slice().copy_from_slice(&[0.2, -0.6]);
        p.b_f = vec![0.5];
        let window = [0.9, -0.2, 0.4];
        let (_, hb) = blstm_forward(&window, &LstmParams::zeros(1, 1), &p).unwrap();
        let (hs, _) = lstm_sequence_forward(&[0.4, -0.2, 0.9], &p).unwrap();
        assert_eq!(hb, hs[2]);
    }

    #[test]
    fn arch_parse() {
        assert_eq!("LSTM".parse::<Arch>().unwrap(), Arch::Lstm);
        assert_eq!("blstm".parse::<Arch>().unwrap(), Arch::Blstm);
        assert!("gru".parse::<Arch>().is_err());
    }

    #[test]
    fn model_rejects_mismatched_arch() {
        let scaler = MinMaxScaler::fit(&[0.0, 1.0]).unwrap();
        let params = Parameters::zeros(Arch::Lstm, 2, 1);
        assert!(RecurrentModel::new(Arch::Blstm, 3, params.clone(), 0.0, scaler).is_err());
        assert!(RecurrentModel::new(Arch::Lstm, 3, params.clone(), 1.0, scaler).is_err());
        assert!(RecurrentModel::new(Arch::Lstm, 3, params, 0.3, scaler).is_ok());
    }
}
