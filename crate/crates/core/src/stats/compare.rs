//! Friedman rank test and Nemenyi all-pairs post-hoc comparison.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::range::{studentized_range_quantile, studentized_range_upper_tail};
use super::special::chi2_upper_tail;
use crate::error::{Error, Result};

/// Scores of `k` models (columns) on `N` datasets (rows); lower is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    datasets: Vec<String>,
    models: Vec<String>,
    /// Row-major, `datasets.len() * models.len()`.
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(datasets: Vec<String>, models: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if datasets.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need N >= 2 datasets, got {}",
                datasets.len()
            )));
        }
        if models.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need k >= 2 models, got {}",
                models.len()
            )));
        }
        if data.len() != datasets.len() * models.len() {
            return Err(Error::dim(
                "score matrix",
                datasets.len() * models.len(),
                data.len(),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "score for dataset {:?}, model {:?}",
                datasets[pos / models.len()],
                models[pos % models.len()]
            )));
        }
        Ok(Self {
            datasets,
            models,
            data,
        })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(datasets: &[&str], models: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != datasets.len() {
            return Err(Error::dim("score rows", datasets.len(), rows.len()));
        }
        let mut data = Vec::with_capacity(rows.len() * models.len());
        for row in rows {
            if row.len() != models.len() {
                return Err(Error::dim("score row", models.len(), row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::new(
            datasets.iter().map(|s| s.to_string()).collect(),
            models.iter().map(|s| s.to_string()).collect(),
            data,
        )
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.models.len();
        &self.data[i * k..(i + 1) * k]
    }

    /// Parses a delimited table: header `dataset,<model>,...`, one row per
    /// dataset.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3 {
            return Err(Error::Schema(
                "score table needs a dataset column and at least two model columns".into(),
            ));
        }
        let models: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i as u64 + 2;
            if rec.len() != header.len() {
                return Err(Error::Row {
                    line,
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            datasets.push(rec[0].to_string());
            for field in rec.iter().skip(1) {
                let v: f64 = field.parse().map_err(|_| Error::Row {
                    line,
                    message: format!("not a number: {field:?}"),
                })?;
                data.push(v);
            }
        }
        Self::new(datasets, models, data)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["dataset".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in self.datasets.iter().enumerate() {
            let mut rec = vec![name.clone()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("score table", e))?;
        Ok(())
    }
}

/// Ranks each row ascending (1 = best); ties get the mean of the ranks they
/// span. Returned row-major, same shape as the scores.
pub fn rank_rows(scores: &ScoreMatrix) -> Vec<Vec<f64>> {
    (0..scores.n_datasets())
        .map(|i| average_ranks(scores.row(i)))
        .collect()
}

fn average_ranks(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &j in &order[start..end] {
            ranks[j] = avg;
        }
        start = end;
    }
    ranks
}

fn mean_ranks(ranks: &[Vec<f64>]) -> Vec<f64> {
    let n = ranks.len() as f64;
    let k = ranks[0].len();
    (0..k)
        .map(|j| ranks.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Friedman statistic from mean ranks, without tie correction:
/// `12N / (k(k+1)) * (Σ R_j² - k(k+1)² / 4)`.
pub fn friedman_from_mean_ranks(mean_ranks: &[f64], n: usize) -> Result<FriedmanResult> {
    let k = mean_ranks.len();
    if n < 2 || k < 2 {
        return Err(Error::InvalidArgument(format!(
            "Friedman test needs N >= 2 and k >= 2, got N = {n}, k = {k}"
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let df = (k - 1) as u32;
    Ok(FriedmanResult {
        chi2,
        df,
        p_value: chi2_upper_tail(chi2, df),
    })
}

pub fn friedman(scores: &ScoreMatrix) -> Result<FriedmanResult> {
    let ranks = rank_rows(scores);
    friedman_from_mean_ranks(&mean_ranks(&ranks), scores.n_datasets())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NemenyiResult {
    /// Symmetric `k × k`, ones on the diagonal.
    pub p_values: Vec<Vec<f64>>,
    pub critical_difference: f64,
}

/// Standard error of a mean-rank difference, scaled for the studentized
/// range: `sqrt(k(k+1) / (12N))`.
fn rank_se(k: usize, n: usize) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    (kf * (kf + 1.0) / (12.0 * nf)).sqrt()
}

/// All-pairs Nemenyi test on mean ranks over `n` datasets.
///
/// `q_ij = |R_i - R_j| / sqrt(k(k+1)/(12N))` is referred to the range of `k`
/// standard normals. The critical difference uses the same scale,
/// `CD = q_alpha * sqrt(k(k+1)/(12N))`, which equals the customary
/// `(q_alpha / √2) * sqrt(k(k+1)/(6N))`.
pub fn nemenyi(mean_ranks: &[f64], n: usize, alpha: f64) -> Result<NemenyiResult> {
    let k = mean_ranks.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("Nemenyi test needs k >= 2, got {k}")));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("Nemenyi test needs N >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let se = rank_se(k, n);
    let mut p_values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let q = (mean_ranks[i] - mean_ranks[j]).abs() / se;
            let p = studentized_range_upper_tail(q, k);
            p_values[i][j] = p;
            p_values[j][i] = p;
        }
    }
    Ok(NemenyiResult {
        p_values,
        critical_difference: studentized_range_quantile(alpha, k) * se,
    })
}

/// Full rank-based comparison of the models in a score matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub rank_matrix: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub chi2: f64,
    pub df: u32,
    pub p_friedman: f64,
    pub nemenyi_p: Vec<Vec<f64>>,
    pub critical_difference: f64,
    pub alpha: f64,
    /// Null hypothesis of equal performance rejected iff `p < alpha`.
    pub reject_null: bool,
}

pub fn compare(scores: &ScoreMatrix, alpha: f64) -> Result<ComparisonResult> {
    let rank_matrix = rank_rows(scores);
    let mean = mean_ranks(&rank_matrix);
    let fr = friedman_from_mean_ranks(&mean, scores.n_datasets())?;
    let ne = nemenyi(&mean, scores.n_datasets(), alpha)?;
    Ok(ComparisonResult {
        datasets: scores.datasets().to_vec(),
        models: scores.models().to_vec(),
        rank_matrix,
        mean_ranks: mean,
        chi2: fr.chi2,
        df: fr.df,
        p_friedman: fr.p_value,
        nemenyi_p: ne.p_values,
        critical_difference: ne.critical_difference,
        alpha,
        reject_null: fr.p_value < alpha,
    })
}

impl ComparisonResult {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Plain-text report.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let width = self
            .datasets
            .iter()
            .chain(&self.models)
            .map(String::len)
            .max()
            .unwrap_or(8)
            .max(10);
        let _ = writeln!(
            out,
            "Friedman test over N = {} datasets, k = {} models",
            self.datasets.len(),
            self.models.len()
        );
        let _ = writeln!(out);
        let _ = write!(out, "{:<width$}", "ranks");
        for m in &self.models {
            let _ = write!(out, " {m:>width$}");
        }
        let _ = writeln!(out);
        for (d, row) in self.datasets.iter().zip(&self.rank_matrix) {
            let _ = write!(out, "{d:<width$}");
            for r in row {
                let _ = write!(out, " {r:>width$.2}");
            }
            let _ = writeln!(out);
        }
        let _ = write!(out, "{:<width$}", "mean rank");
        for r in &self.mean_ranks {
            let _ = write!(out, " {r:>width$.4}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out);
        let _ = writeln!(out, "chi2 = {:.6}", self.chi2);
        let _ = writeln!(out, "df = {}", self.df);
        let _ = writeln!(out, "p = {:.6}", self.p_friedman);
        let _ = writeln!(
            out,
            "alpha = {}: {}",
            self.alpha,
            if self.reject_null {
                "reject equal performance"
            } else {
                "no significant difference"
            }
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "Nemenyi pairwise p-values");
        let _ = write!(out, "{:<width$}", "");
        for m in &self.models {
            let _ = write!(out, " {m:>width$}");
        }
        let _ = writeln!(out);
        for (m, row) in self.models.iter().zip(&self.nemenyi_p) {
            let _ = write!(out, "{m:<width$}");
            for p in row {
                let _ = write!(out, " {p:>width$.6}");
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "critical difference = {:.6}", self.critical_difference);
        out
    }
}
