use chrono::{Datelike, Duration};
use loadcast::metrics::acf;
use loadcast::series_io::{format_timestamp, TimeSeries};
use serde::Serialize;

use super::{fmt_f64, load_ingested, Failures, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::fsutil::{write_atomic, write_csv_atomic};
use crate::layout::Layout;

pub const ACF_MAX_LAG: usize = 100;

/// Five-number summary of one calendar quarter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarterSummary {
    pub quarter: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Groups the series by calendar quarter. Returns `None` when it spans less
/// than one quarter (90 days).
pub fn quarterly_summary(ts: &TimeSeries) -> Option<Vec<QuarterSummary>> {
    if ts.end() - ts.start() < Duration::days(90) {
        return None;
    }
    let mut groups: Vec<((i32, u32), Vec<f64>)> = Vec::new();
    for (i, &v) in ts.values().iter().enumerate() {
        let t = ts.timestamp(i);
        let key = (t.year(), (t.month() - 1) / 3 + 1);
        match groups.last_mut() {
            Some((k, vals)) if *k == key => vals.push(v),
            _ => groups.push((key, vec![v])),
        }
    }
    Some(
        groups
            .into_iter()
            .map(|((year, q), mut vals)| {
                vals.sort_by(f64::total_cmp);
                QuarterSummary {
                    quarter: format!("{year}-Q{q}"),
                    count: vals.len(),
                    min: vals[0],
                    q1: quantile(&vals, 0.25),
                    median: quantile(&vals, 0.5),
                    q3: quantile(&vals, 0.75),
                    max: vals[vals.len() - 1],
                }
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct EdaSummary {
    dataset: String,
    points: usize,
    train_cv_points: usize,
    holdout_points: usize,
    acf_max_lag: usize,
    acf_significance_bound: f64,
    quarters: Option<usize>,
    notice: Option<String>,
}

/// Writes plot data for the series, its quarterly distribution and its
/// autocorrelation up to lag 100.
pub fn eda(cfg: &ExperimentConfig, layout: &Layout, opts: &RunOptions) -> CliResult<()> {
    let mut failures = Failures::default();
    for d in cfg.select_datasets(&opts.datasets)? {
        if let Err(e) = eda_one(layout, &d.id) {
            failures.record(&d.id, None, e);
        }
    }
    failures.finish(())
}

fn eda_one(layout: &Layout, id: &str) -> CliResult<()> {
    let data = load_ingested(layout, id)?;
    let full = data.train_cv.concat(&data.holdout)?;
    let dir = layout.eda_dir(id);
    let split = data.train_cv.len();

    write_csv_atomic(
        &dir.join("series.csv"),
        &["timestamp", "value", "subset"],
        full.values().iter().enumerate().map(|(i, v)| {
            [
                format_timestamp(full.timestamp(i)),
                fmt_f64(*v),
                if i < split { "train_cv" } else { "holdout" }.to_string(),
            ]
        }),
    )?;

    let acf = acf(full.values(), ACF_MAX_LAG)?;
    let bound = acf.significance_bound;
    write_csv_atomic(
        &dir.join("acf.csv"),
        &["lag", "acf", "lower", "upper"],
        acf.coefficients.iter().enumerate().map(|(lag, r)| {
            [lag.to_string(), fmt_f64(*r), fmt_f64(-bound), fmt_f64(bound)]
        }),
    )?;

    let quarters = quarterly_summary(&full);
    let boxplot = dir.join("quarterly_boxplot.csv");
    let notice = match &quarters {
        Some(q) => {
            write_csv_atomic(
                &boxplot,
                &["quarter", "count", "min", "q1", "median", "q3", "max"],
                q.iter().map(|s| {
                    [
                        s.quarter.clone(),
                        s.count.to_string(),
                        fmt_f64(s.min),
                        fmt_f64(s.q1),
                        fmt_f64(s.median),
                        fmt_f64(s.q3),
                        fmt_f64(s.max),
                    ]
                }),
            )?;
            None
        }
        None => {
            if boxplot.exists() {
                std::fs::remove_file(&boxplot).map_err(|e| crate::CliError::io(&boxplot, e))?;
            }
            let msg = "series spans less than one quarter; quarterly boxplot omitted".to_string();
            eprintln!("notice: {id}: {msg}");
            Some(msg)
        }
    };

    let summary = EdaSummary {
        dataset: id.to_string(),
        points: full.len(),
        train_cv_points: data.manifest.train_cv_points,
        holdout_points: data.manifest.holdout_points,
        acf_max_lag: ACF_MAX_LAG,
        acf_significance_bound: bound,
        quarters: quarters.as_ref().map(Vec::len),
        notice,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| crate::CliError::Core(e.into()))?;
    json.push('\n');
    write_atomic(&dir.join("summary.json"), json.as_bytes())?;
    println!("eda {id}: {} points, ACF band ±{bound:.5}", full.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use loadcast::series_io::PowerUnit;

    fn daily(start: (i32, u32, u32), days: usize) -> TimeSeries {
        let t0 = NaiveDate::from_ymd_opt(start.0, start.1, start.2)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        TimeSeries::new(t0, Duration::days(1), (0..days).map(|i| i as f64).collect(), PowerUnit::KW).unwrap()
    }

    #[test]
    fn one_year_has_four_quarters() {
        let q = quarterly_summary(&daily((2021, 1, 1), 365)).unwrap();
        let names: Vec<_> = q.iter().map(|s| s.quarter.as_str()).collect();
        assert_eq!(names, ["2021-Q1", "2021-Q2", "2021-Q3", "2021-Q4"]);
        assert_eq!(q[0].count, 90);
        assert_eq!((q[0].min, q[0].max), (0.0, 89.0));
        assert_eq!(q[0].median, 44.5);
        assert_eq!(q[0].q1, 22.25);
    }

    #[test]
    fn short_series_has_no_quarters() {
        assert!(quarterly_summary(&daily((2021, 1, 1), 60)).is_none());
    }
}
