use std::path::Path;

use loadcast::stats::{compare as compare_scores, ComparisonResult, ScoreMatrix};

use super::{HoldoutSummary, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::fsutil::{read_to_string, write_atomic};
use crate::layout::Layout;

/// Assembles the datasets × architectures NRMSE matrix from evaluation
/// outputs. Each cell is the average holdout NRMSE over the fold models;
/// with `per_fold_blocks` every fold model becomes its own row instead.
pub fn score_matrix_from_eval(
    cfg: &ExperimentConfig,
    layout: &Layout,
    opts: &RunOptions,
) -> CliResult<ScoreMatrix> {
    let datasets = cfg.select_datasets(&opts.datasets)?;
    let archs = cfg.select_archs(&opts.archs);
    let mut missing = Vec::new();
    let mut cells = Vec::new();
    for d in &datasets {
        let mut row = Vec::new();
        for &arch in &archs {
            let path = layout.metrics_json(&d.id, arch);
            match read_to_string(&path) {
                Ok(text) => {
                    let s: HoldoutSummary =
                        serde_json::from_str(&text).map_err(|e| CliError::Core(e.into()))?;
                    row.push(s);
                }
                Err(CliError::Missing(_)) => missing.push(format!("{}/{arch}", d.id)),
                Err(e) => return Err(e),
            }
        }
        cells.push(row);
    }
    if !missing.is_empty() {
        return Err(CliError::Missing(format!(
            "evaluation results for {}",
            missing.join(", ")
        )));
    }

    let models: Vec<String> = archs.iter().map(|a| a.label().to_string()).collect();
    let mut names = Vec::new();
    let mut data = Vec::new();
    if opts.per_fold_blocks {
        for (d, row) in datasets.iter().zip(&cells) {
            let folds = row[0].table.rows.len();
            if let Some(bad) = row.iter().find(|s| s.table.rows.len() != folds) {
                return Err(CliError::Config(format!(
                    "{}: {} has {} fold models, expected {folds}",
                    d.id,
                    bad.arch,
                    bad.table.rows.len()
                )));
            }
            for f in 0..folds {
                names.push(format!("{}/fold_{:02}", d.id, f + 1));
                data.extend(row.iter().map(|s| s.table.rows[f].nrmse));
            }
        }
    } else {
        for (d, row) in datasets.iter().zip(&cells) {
            names.push(d.id.clone());
            data.extend(row.iter().map(|s| s.table.summary[1].average));
        }
    }
    Ok(ScoreMatrix::new(names, models, data)?)
}

/// Friedman and Nemenyi tests over the score matrix; writes
/// `compare/{scores.csv, report.json, report.txt}`.
pub fn compare(
    cfg: Option<&ExperimentConfig>,
    layout: &Layout,
    opts: &RunOptions,
) -> CliResult<ComparisonResult> {
    let scores = match (&opts.scores, cfg) {
        (Some(path), _) => read_scores(path)?,
        (None, Some(cfg)) => score_matrix_from_eval(cfg, layout, opts)?,
        (None, None) => {
            return Err(CliError::Config(
                "compare needs --config or --scores".into(),
            ))
        }
    };
    let alpha = opts.alpha.or(cfg.map(|c| c.alpha)).unwrap_or(0.05);
    let result = compare_scores(&scores, alpha)?;

    let dir = layout.compare_dir();
    let mut buf = Vec::new();
    scores.write_csv(&mut buf)?;
    write_atomic(&dir.join("scores.csv"), &buf)?;
    write_atomic(&dir.join("report.json"), result.to_json()?.as_bytes())?;
    let text = result.to_text();
    write_atomic(&dir.join("report.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(result)
}

fn read_scores(path: &Path) -> CliResult<ScoreMatrix> {
    let text = read_to_string(path)?;
    Ok(ScoreMatrix::read_csv(text.as_bytes())?)
}
