use loadcast::rnn::Arch;

use super::{fmt_f64, HoldoutSummary, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::fsutil::{read_to_string, write_csv_atomic};
use crate::layout::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportOutcome {
    Written,
    /// No evaluation outputs exist yet.
    Empty,
}

fn read_summary(layout: &Layout, id: &str, arch: Arch) -> CliResult<Option<HoldoutSummary>> {
    match read_to_string(&layout.metrics_json(id, arch)) {
        Ok(text) => Ok(Some(
            serde_json::from_str(&text).map_err(|e| CliError::Core(e.into()))?,
        )),
        Err(CliError::Missing(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Total training wall time in seconds, from the timing table.
fn read_wall_time(layout: &Layout, id: &str, arch: Arch) -> CliResult<Option<f64>> {
    let path = layout.timing(id, arch);
    let text = match read_to_string(&path) {
        Ok(t) => t,
        Err(CliError::Missing(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut total = 0.0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Core(e.into()))?;
        total += rec
            .get(3)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| CliError::Config(format!("bad wall time in {}", path.display())))?;
    }
    Ok(Some(total))
}

/// Consolidated average NRMSE and R² per dataset and architecture, and the
/// cross-validation training time in hours.
pub fn report(cfg: &ExperimentConfig, layout: &Layout, opts: &RunOptions) -> CliResult<ReportOutcome> {
    let datasets = cfg.select_datasets(&opts.datasets)?;
    let archs = cfg.select_archs(&opts.archs);

    let mut consolidated = Vec::new();
    let mut timing = Vec::new();
    let mut any = false;
    for d in &datasets {
        let mut row = vec![d.id.clone()];
        let mut trow = vec![d.id.clone()];
        for &arch in &archs {
            match read_summary(layout, &d.id, arch)? {
                Some(s) => {
                    any = true;
                    row.push(fmt_f64(s.table.summary[1].average));
                    row.push(fmt_f64(s.table.summary[4].average));
                }
                None => row.extend([String::new(), String::new()]),
            }
            trow.push(
                read_wall_time(layout, &d.id, arch)?
                    .map(|secs| format!("{:.2}", secs / 3600.0))
                    .unwrap_or_default(),
            );
        }
        consolidated.push(row);
        timing.push(trow);
    }
    if !any {
        println!("report: no evaluation outputs found under {}; nothing to report", layout.root().display());
        return Ok(ReportOutcome::Empty);
    }

    let mut header = vec!["dataset".to_string()];
    for a in &archs {
        header.push(format!("{} NRMSE", a.label()));
        header.push(format!("{} R2 (%)", a.label()));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let dir = layout.report_dir();
    write_csv_atomic(&dir.join("consolidated.csv"), &header, &consolidated)?;

    let theader: Vec<String> = std::iter::once("dataset".to_string())
        .chain(archs.iter().map(|a| format!("{} time (h)", a.label())))
        .collect();
    let theader: Vec<&str> = theader.iter().map(String::as_str).collect();
    write_csv_atomic(&dir.join("timing.csv"), &theader, &timing)?;
    println!("report: wrote {}", dir.display());
    Ok(ReportOutcome::Written)
}
