//! Experiment configuration files.
//!
//! A config is a TOML document. Every hyperparameter has a default equal to
//! the full-scale setting, so a config only has to describe its datasets.
//! Relative paths are resolved against the directory holding the config.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDateTime};
use loadcast::rnn::{Arch, Hyper};
use loadcast::series_io::{parse_timestamp, CsvSchema, GapPolicy, PowerUnit, SplitSpec};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::fsutil::read_to_string;

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_archs() -> Vec<Arch> {
    Arch::ALL.to_vec()
}

fn default_k() -> usize {
    10
}

fn default_alpha() -> f64 {
    0.05
}

/// Network and optimizer settings. The seed lives at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub dropout: f64,
    pub window: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for HyperConfig {
    fn default() -> Self {
        let h = Hyper::default();
        HyperConfig {
            hidden: h.hidden,
            epochs: h.epochs,
            batch: h.batch,
            dropout: h.dropout,
            window: h.window,
            lr: h.lr,
            rho: h.rho,
            eps: h.eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub id: String,
    pub path: PathBuf,
    pub unit: PowerUnit,
    pub schema: CsvSchema,
    /// Resampling interval; the file's native step when absent.
    #[serde(default)]
    pub interval_minutes: Option<u32>,
    /// First timestamp of the holdout period.
    pub holdout_start: String,
    #[serde(default)]
    pub gap_policy: GapPolicy,
}

impl DatasetConfig {
    pub fn interval(&self) -> Option<Duration> {
        self.interval_minutes.map(|m| Duration::minutes(i64::from(m)))
    }

    pub fn split(&self) -> CliResult<SplitSpec> {
        Ok(SplitSpec {
            boundary: self.boundary()?,
        })
    }

    fn boundary(&self) -> CliResult<NaiveDateTime> {
        parse_timestamp(&self.holdout_start).map_err(|e| {
            CliError::Config(format!("dataset {:?}: holdout_start: {e}", self.id))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_archs")]
    pub archs: Vec<Arch>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub hyper: HyperConfig,
    #[serde(rename = "dataset", default)]
    pub datasets: Vec<DatasetConfig>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::parse(&text, base).map_err(|e| match e {
            CliError::ConfigSyntax { message, .. } => CliError::ConfigSyntax {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses and validates a config whose relative paths refer to
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> CliResult<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::ConfigSyntax {
                path: PathBuf::from("<config>"),
                message: e.to_string(),
            })?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.archs.is_empty() {
            return bad("archs must name at least one architecture".into());
        }
        let mut seen = HashSet::new();
        for a in &self.archs {
            if !seen.insert(*a) {
                return bad(format!("architecture {a} listed twice"));
            }
        }
        self.hyper_with_seed(self.seed)
            .validate()
            .map_err(|e| CliError::Config(format!("hyper: {e}")))?;
        let mut ids = HashSet::new();
        for d in &self.datasets {
            if d.id.is_empty()
                || !d
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return bad(format!(
                    "dataset id {:?} must be non-empty ASCII letters, digits, '_' or '-'",
                    d.id
                ));
            }
            if !ids.insert(d.id.as_str()) {
                return bad(format!("dataset id {:?} listed twice", d.id));
            }
            if d.interval_minutes == Some(0) {
                return bad(format!("dataset {:?}: interval_minutes must be positive", d.id));
            }
            d.boundary()?;
        }
        Ok(())
    }

    pub fn hyper_with_seed(&self, seed: u64) -> Hyper {
        let h = self.hyper;
        Hyper {
            hidden: h.hidden,
            epochs: h.epochs,
            batch: h.batch,
            dropout: h.dropout,
            window: h.window,
            lr: h.lr,
            rho: h.rho,
            eps: h.eps,
            seed,
        }
    }

    pub fn hyper(&self) -> Hyper {
        self.hyper_with_seed(self.seed)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_root(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn dataset(&self, id: &str) -> Option<&DatasetConfig> {
        self.datasets.iter().find(|d| d.id == id)
    }

    /// Datasets named in `filter`, or all of them when it is empty.
    pub fn select_datasets(&self, filter: &[String]) -> CliResult<Vec<&DatasetConfig>> {
        if filter.is_empty() {
            return Ok(self.datasets.iter().collect());
        }
        filter
            .iter()
            .map(|id| {
                self.dataset(id)
                    .ok_or_else(|| CliError::Config(format!("unknown dataset {id:?}")))
            })
            .collect()
    }

    /// Architectures named in `filter`, or the configured list.
    pub fn select_archs(&self, filter: &[Arch]) -> Vec<Arch> {
        if filter.is_empty() {
            self.archs.clone()
        } else {
            filter.to_vec()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[dataset]]
id = "toy"
path = "toy.csv"
unit = "kW"
holdout_start = "2020-02-01T00:00:00"
[dataset.schema]
time_columns = ["timestamp"]
time_format = "%Y-%m-%dT%H:%M:%S"
value_column = "value"
"#;

    #[test]
    fn defaults_are_full_scale() {
        let cfg = ExperimentConfig::parse(MINIMAL, "/cfg").unwrap();
        let h = cfg.hyper();
        assert_eq!((h.hidden, h.epochs, h.batch, h.window), (100, 100, 32, 90));
        assert_eq!(h.dropout, 0.3);
        assert_eq!(h.lr, 1e-3);
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.archs, vec![Arch::Lstm, Arch::Blstm]);
        assert_eq!(cfg.resolve(&cfg.datasets[0].path), PathBuf::from("/cfg/toy.csv"));
        assert_eq!(cfg.datasets[0].gap_policy, GapPolicy::ForwardFill);
    }

    #[test]
    fn rejects_invalid_values() {
        for extra in ["k = 1\n", "alpha = 1.5\n", "archs = []\n", "bogus = 3\n"] {
            let text = format!("{extra}{MINIMAL}");
            assert!(ExperimentConfig::parse(&text, ".").is_err(), "{extra}");
        }
        let text = format!("[hyper]\nhidden = 0\n{MINIMAL}");
        assert!(matches!(ExperimentConfig::parse(&text, "."), Err(CliError::Config(_))));
        let dup = format!("{MINIMAL}{}", MINIMAL.replace("toy.csv", "other.csv"));
        assert!(ExperimentConfig::parse(&dup, ".").is_err());
        let bad_time = MINIMAL.replace("2020-02-01T00:00:00", "Feb 1");
        assert!(ExperimentConfig::parse(&bad_time, ".").is_err());
    }

    #[test]
    fn unknown_hyper_key_is_a_syntax_error() {
        let text = format!("[hyper]\nunits = 10\n{MINIMAL}");
        assert!(matches!(
            ExperimentConfig::parse(&text, "."),
            Err(CliError::ConfigSyntax { .. })
        ));
    }
}
