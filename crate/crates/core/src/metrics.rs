//! Point-forecast error metrics, summary statistics over model tables, and
//! the sample autocorrelation function.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Actual values with `|y| <= MAPE_EPS` are left out of MAPE.
pub const MAPE_EPS: f64 = 1e-9;

/// Errors of one model on one evaluation set. RMSE and MAE are in the
/// units of the data; MAPE and R² are percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub nrmse: f64,
    pub mae: f64,
    pub mape_pct: f64,
    pub r2_pct: f64,
    /// Points that entered the MAPE average.
    pub n_used_mape: usize,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 5] = ["RMSE", "NRMSE", "MAE", "MAPE (%)", "R2 (%)"];

    pub fn values(&self) -> [f64; 5] {
        [self.rmse, self.nrmse, self.mae, self.mape_pct, self.r2_pct]
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// RMSE, NRMSE (RMSE over the mean actual value), MAE, MAPE and R².
pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricReport> {
    if actual.len() != predicted.len() {
        return Err(Error::dim("predicted length", actual.len(), predicted.len()));
    }
    let n = actual.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "metrics need at least 2 points, got {n}"
        )));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric input".into()));
    }

    let y_bar = mean(actual);
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut sst = 0.0;
    let mut ape = 0.0;
    let mut n_used = 0usize;
    for (&y, &p) in actual.iter().zip(predicted) {
        let e = y - p;
        sse += e * e;
        sae += e.abs();
        sst += (y - y_bar) * (y - y_bar);
        if y.abs() > MAPE_EPS {
            ape += (e / y).abs();
            n_used += 1;
        }
    }
    if sst == 0.0 {
        return Err(Error::Undefined("R² of a constant actual series".into()));
    }
    if n_used == 0 {
        return Err(Error::Undefined("MAPE with every actual value at zero".into()));
    }
    if !(y_bar > 0.0) {
        return Err(Error::Undefined(format!(
            "NRMSE needs a positive mean actual value, got {y_bar}"
        )));
    }
    let rmse = (sse / n as f64).sqrt();
    Ok(MetricReport {
        rmse,
        nrmse: rmse / y_bar,
        mae: sae / n as f64,
        mape_pct: 100.0 * ape / n_used as f64,
        r2_pct: 100.0 * (1.0 - sse / sst),
        n_used_mape: n_used,
    })
}

/// Average, median, sample standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub average: f64,
    pub median: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub const LABELS: [&'static str; 5] = ["Average", "Median", "St-Dev", "Min", "Max"];

    pub fn of(values: &[f64]) -> Result<Summary> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("summary of an empty column".into()));
        }
        let n = values.len();
        // Shifted mean: exact when every value is the same.
        let x0 = values[0];
        let average = x0 + values.iter().map(|v| v - x0).sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let std_dev = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - average).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Summary {
            average,
            median,
            std_dev,
            min: sorted[0],
            max: sorted[n - 1],
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [self.average, self.median, self.std_dev, self.min, self.max]
    }
}

/// Per-model metric rows plus a summary of each column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub rows: Vec<MetricReport>,
    /// `summary[c]` summarizes column `c` of [`MetricReport::COLUMNS`].
    pub summary: [Summary; 5],
}

impl MetricTable {
    pub fn new(rows: Vec<MetricReport>) -> Result<Self> {
        let column = |c: usize| rows.iter().map(|r| r.values()[c]).collect::<Vec<_>>();
        let summary = [
            Summary::of(&column(0))?,
            Summary::of(&column(1))?,
            Summary::of(&column(2))?,
            Summary::of(&column(3))?,
            Summary::of(&column(4))?,
        ];
        Ok(MetricTable { rows, summary })
    }

    /// Summary row `s` (0 = average .. 4 = max) across the five columns.
    pub fn summary_row(&self, s: usize) -> [f64; 5] {
        std::array::from_fn(|c| self.summary[c].values()[s])
    }

    /// Numbered model rows then the five summary rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["model"];
        header.extend(MetricReport::COLUMNS);
        w.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(r.values().iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        for (s, label) in Summary::LABELS.iter().enumerate() {
            let mut rec = vec![label.to_string()];
            rec.extend(self.summary_row(s).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<metric table>", e))?;
        Ok(())
    }
}

/// Sample autocorrelation up to a maximum lag with the ±1.96/√n band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// `coefficients[k]` is the lag-`k` autocorrelation.
    pub coefficients: Vec<f64>,
    pub significance_bound: f64,
    pub n: usize,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_significant(&self, lag: usize) -> bool {
        self.coefficients[lag].abs() > self.significance_bound
    }
}

/// `r_k = sum_{t<n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = series.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::InvalidArgument(format!(
            "ACF needs 1 <= max_lag < n, got max_lag={max_lag}, n={n}"
        )));
    }
    let m = mean(series);
    let dev: Vec<f64> = series.iter().map(|x| x - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::Undefined("autocorrelation of a constant series".into()));
    }
    let coefficients = (0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect();
    Ok(AcfResult {
        coefficients,
        significance_bound: 1.96 / (n as f64).sqrt(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_case() {
        let r = compute_metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((r.rmse - 0.816_497).abs() < 1e-6);
        assert!((r.mae - 0.666_667).abs() < 1e-6);
        assert!((r.mape_pct - 44.4444).abs() < 1e-4);
        assert!(r.r2_pct.abs() < 1e-12);
        assert!((r.nrmse - 0.408_248).abs() < 1e-6);
        assert_eq!(r.n_used_mape, 3);
    }

    #[test]
    fn perfect_forecast() {
        let y = [3.0, 1.0, 4.0, 1.5];
        let r = compute_metrics(&y, &y).unwrap();
        assert_eq!(r.values(), [0.0, 0.0, 0.0, 0.0, 100.0]);
    }

    #[test]
    fn zero_actuals_are_excluded_from_mape() {
        let r = compute_metrics(&[0.0, 2.0, 4.0], &[1.0, 1.0, 4.0]).unwrap();
        assert_eq!(r.n_used_mape, 2);
        assert!((r.mape_pct - 25.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(
            compute_metrics(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(
            compute_metrics(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]),
            Err(Error::Undefined(_))
        ));
        assert!(compute_metrics(&[1.0, 2.0], &[1.0]).is_err());
        assert!(compute_metrics(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn negative_r2_is_allowed() {
        let r = compute_metrics(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((r.r2_pct + 300.0).abs() < 1e-9);
    }

    #[test]
    fn summary_rows() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.average, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[7.0; 10]).unwrap().std_dev, 0.0);
    }

    #[test]
    fn table_csv_layout() {
        let r = compute_metrics(&[1.0, 2.0, 3.0], &[1.5, 2.0, 2.5]).unwrap();
        let table = MetricTable::new(vec![r; 10]).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0], "model,RMSE,NRMSE,MAE,MAPE (%),R2 (%)");
        assert!(lines[13].starts_with("St-Dev,0,0,0,0,0"));
        assert!(lines[15].starts_with("Max,"));
    }

    #[test]
    fn acf_cases() {
        let r = acf(&[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(r.coefficients[0], 1.0);
        assert!((r.coefficients[1] - 0.25).abs() < 1e-15);
        assert_eq!(r.significance_bound, 1.96 / 2.0);

        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&alt, 2).unwrap();
        assert!((r.coefficients[1] + 0.99).abs() < 1e-12);
        assert!((r.coefficients[2] - 0.98).abs() < 1e-12);

        assert!(matches!(acf(&[3.0; 10], 2), Err(Error::Undefined(_))));
        assert!(acf(&[1.0, 2.0], 2).is_err());
        assert!(acf(&[1.0, 2.0, 3.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn acf_bounded(xs in prop::collection::vec(-100.0f64..100.0, 5..80)) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-6));
            let r = acf(&xs, xs.len() - 1).unwrap();
            prop_assert!(r.coefficients.iter().all(|c| c.abs() <= 1.0 + 1e-12));
        }

        #[test]
        fn rmse_dominates_mae(
            pairs in prop::collection::vec((0.1f64..100.0, -50.0f64..150.0), 3..40)
        ) {
            let (a, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(a.iter().any(|&x| (x - a[0]).abs() > 1e-6));
            let r = compute_metrics(&a, &p).unwrap();
            prop_assert!(r.rmse >= r.mae - 1e-12);
            prop_assert!(r.r2_pct <= 100.0);
        }
    }
}
