//! Min-max scaling and sliding-window supervised framing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps `[data_min, data_max]` linearly onto `[range_lo, range_hi]`.
///
/// Values outside the fitted range are not clamped, so the transform stays
/// linear and exactly invertible on unseen data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub data_min: f64,
    pub data_max: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl MinMaxScaler {
    /// Fits on the extrema of `train_values` with output range `[0, 1]`.
    pub fn fit(train_values: &[f64]) -> Result<Self> {
        if train_values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "scaler needs at least 2 values, got {}",
                train_values.len()
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in train_values {
            if !v.is_finite() {
                return Err(Error::NonFinite("scaler input".into()));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self::from_parts(lo, hi, 0.0, 1.0)
    }

    pub fn from_parts(data_min: f64, data_max: f64, range_lo: f64, range_hi: f64) -> Result<Self> {
        if !(data_max > data_min) {
            return Err(Error::DegenerateScale(data_min));
        }
        if !(range_hi > range_lo) {
            return Err(Error::InvalidArgument(format!(
                "feature range ({range_lo}, {range_hi}) is empty"
            )));
        }
        Ok(MinMaxScaler {
            data_min,
            data_max,
            range_lo,
            range_hi,
        })
    }

    pub fn transform(&self, x: f64) -> f64 {
        let unit = (x - self.data_min) / (self.data_max - self.data_min);
        self.range_lo + unit * (self.range_hi - self.range_lo)
    }

    pub fn inverse_transform(&self, z: f64) -> f64 {
        let unit = (z - self.range_lo) / (self.range_hi - self.range_lo);
        self.data_min + unit * (self.data_max - self.data_min)
    }

    pub fn transform_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.transform(x)).collect()
    }

    pub fn inverse_transform_all(&self, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.inverse_transform(z)).collect()
    }
}

/// Input windows of length `window_len` paired with the next value.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    window_len: usize,
    /// Row-major `n_samples x window_len`.
    inputs: Vec<f64>,
    targets: Vec<f64>,
    /// Index in the source series of `targets[0]`.
    origin_index: usize,
}

impl WindowedDataset {
    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.window_len..(i + 1) * self.window_len]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.inputs
            .chunks_exact(self.window_len)
            .zip(self.targets.iter().copied())
    }
}

/// Frames every possible window: `values.len() - w` samples, the first
/// target being `values[w]`.
pub fn frame_windows(values: &[f64], w: usize) -> Result<WindowedDataset> {
    if w == 0 {
        return Err(Error::InvalidArgument("window length must be at least 1".into()));
    }
    if values.len() <= w {
        return Err(Error::InvalidArgument(format!(
            "series of length {} is too short for window {w}",
            values.len()
        )));
    }
    frame_targets(values, w, w, values.len())
}

/// Frames windows whose targets are `values[target_start..target_end]`, each
/// conditioned on the `w` observed values before it. Lets evaluation regions
/// borrow history from the preceding training data.
pub fn frame_targets(
    values: &[f64],
    w: usize,
    target_start: usize,
    target_end: usize,
) -> Result<WindowedDataset> {
    if w == 0 {
        return Err(Error::InvalidArgument("window length must be at least 1".into()));
    }
    if target_start < w {
        return Err(Error::InvalidArgument(format!(
            "target {target_start} has fewer than {w} points of history"
        )));
    }
    if target_end > values.len() || target_start >= target_end {
        return Err(Error::InvalidArgument(format!(
            "target range {target_start}..{target_end} invalid for length {}",
            values.len()
        )));
    }
    let n = target_end - target_start;
    let mut inputs = Vec::with_capacity(n * w);
    for t in target_start..target_end {
        inputs.extend_from_slice(&values[t - w..t]);
    }
    Ok(WindowedDataset {
        window_len: w,
        inputs,
        targets: values[target_start..target_end].to_vec(),
        origin_index: target_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fit_extrema() {
        let s = MinMaxScaler::fit(&[2.0, 4.0, 6.0]).unwrap();
        assert_eq!((s.data_min, s.data_max), (2.0, 6.0));
        let id = MinMaxScaler::fit(&[0.0, 1.0]).unwrap();
        assert_eq!(id.transform(0.25), 0.25);
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(
            MinMaxScaler::fit(&[5.0, 5.0, 5.0]),
            Err(Error::DegenerateScale(_))
        ));
        assert!(MinMaxScaler::fit(&[1.0]).is_err());
    }

    #[test]
    fn transform_values() {
        let s = MinMaxScaler::fit(&[2.0, 6.0]).unwrap();
        assert_eq!(s.transform(4.0), 0.5);
        assert_eq!(s.transform(2.0), 0.0);
        assert_eq!(s.transform(8.0), 1.5);
        assert_eq!(s.inverse_transform(1.5), 8.0);
    }

    #[test]
    fn frame_small() {
        let ds = frame_windows(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.input(0), &[1.0, 2.0]);
        assert_eq!(ds.input(1), &[2.0, 3.0]);
        assert_eq!(ds.targets(), &[3.0, 4.0]);
        assert_eq!(ds.origin_index(), 2);
    }

    #[test]
    fn frame_boundaries() {
        let v: Vec<f64> = (0..91).map(f64::from).collect();
        assert_eq!(frame_windows(&v, 90).unwrap().len(), 1);
        assert!(frame_windows(&v[..90], 90).is_err());
        assert!(frame_windows(&v, 0).is_err());
    }

    #[test]
    fn holdout_framing_borrows_history() {
        // 90 training points followed by a 3725-point holdout.
        let v: Vec<f64> = (0..90 + 3725).map(|i| i as f64).collect();
        let ds = frame_targets(&v, 90, 90, v.len()).unwrap();
        assert_eq!(ds.len(), 3725);
        assert_eq!(ds.input(0)[89], 89.0);
        assert_eq!(ds.target(0), 90.0);
        assert!(frame_targets(&v, 90, 89, v.len()).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(lo in -1e6f64..1e6, width in 1e-3f64..1e6, x in -1e7f64..1e7) {
            let s = MinMaxScaler::fit(&[lo, lo + width]).unwrap();
            let back = s.inverse_transform(s.transform(x));
            let scale = x.abs().max(lo.abs()).max(width).max(1.0);
            prop_assert!((back - x).abs() <= 1e-12 * scale);
        }

        #[test]
        fn training_values_in_unit_range(v in prop::collection::vec(-1e3f64..1e3, 2..50)) {
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let s = MinMaxScaler::fit(&v).unwrap();
            let z = s.transform_all(&v);
            prop_assert!(z.iter().all(|&x| (0.0..=1.0).contains(&x)));
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(s.transform(lo), 0.0);
            prop_assert_eq!(s.transform(hi), 1.0);
        }

        #[test]
        fn window_count(len in 2usize..300, w in 1usize..100) {
            prop_assume!(len > w);
            let v: Vec<f64> = (0..len).map(|i| i as f64).collect();
            let ds = frame_windows(&v, w).unwrap();
            prop_assert_eq!(ds.len(), len - w);
            for i in 0..ds.len() {
                prop_assert_eq!(ds.input(i), &v[i..i + w]);
                prop_assert_eq!(ds.target(i), v[i + w]);
            }
        }
    }
}
