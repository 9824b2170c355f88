use loadcast::series_io::{load_csv, prepare_dataset, write_series_csv, DatasetManifest};

use super::{Failures, RunOptions};
use crate::config::{DatasetConfig, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::fsutil::write_atomic;
use crate::layout::Layout;

/// Loads, cleans, resamples and splits every selected dataset. A failing
/// dataset is reported and the others still run.
pub fn ingest(
    cfg: &ExperimentConfig,
    layout: &Layout,
    opts: &RunOptions,
) -> CliResult<Vec<DatasetManifest>> {
    let mut manifests = Vec::new();
    let mut failures = Failures::default();
    for d in cfg.select_datasets(&opts.datasets)? {
        match ingest_one(cfg, layout, d) {
            Ok(m) => {
                println!(
                    "ingest {}: {} points, {} train/cv + {} holdout, {} filled",
                    m.dataset, m.points, m.train_cv_points, m.holdout_points, m.filled
                );
                manifests.push(m);
            }
            Err(e) => failures.record(&d.id, None, e),
        }
    }
    failures.finish(manifests)
}

fn ingest_one(cfg: &ExperimentConfig, layout: &Layout, d: &DatasetConfig) -> CliResult<DatasetManifest> {
    let path = cfg.resolve(&d.path);
    if !path.is_file() {
        return Err(CliError::Missing(format!("data file {}", path.display())));
    }
    let source = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let raw = load_csv(&path, &d.schema, &source, d.unit)?;
    let prepared = prepare_dataset(&d.id, &raw, d.gap_policy, d.interval(), d.split()?)?;

    let mut json = prepared.manifest.to_json()?;
    json.push('\n');
    write_atomic(&layout.manifest(&d.id), json.as_bytes())?;
    for (ts, target) in [
        (&prepared.train_cv, layout.train_cv(&d.id)),
        (&prepared.holdout, layout.holdout(&d.id)),
    ] {
        let mut buf = Vec::new();
        write_series_csv(ts, &mut buf)?;
        write_atomic(&target, &buf)?;
    }
    Ok(prepared.manifest)
}
