use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loadcast::rnn::Arch;
use loadcast_cli::commands::{self, RunOptions};
use loadcast_cli::{CliError, CliResult, ExperimentConfig, Layout};

#[derive(Parser)]
#[command(name = "loadcast", version, about = "LSTM/BLSTM load forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Only this dataset id (repeatable).
    #[arg(long = "dataset", global = true)]
    datasets: Vec<String>,

    /// Only this architecture: lstm or blstm (repeatable).
    #[arg(long = "arch", global = true)]
    archs: Vec<Arch>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Folds trained in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Compare with one block per (dataset, fold) instead of per dataset.
    #[arg(long, global = true)]
    per_fold_blocks: bool,

    /// Significance level for compare; overrides the config.
    #[arg(long, global = true)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Load, clean, resample and split each dataset.
    Ingest,
    /// Series, quarterly box plot and ACF plot data.
    Eda,
    /// Time-series cross-validated training.
    Train,
    /// Holdout metrics and prediction overlays for every fold model.
    Evaluate,
    /// Friedman and Nemenyi tests across datasets.
    Compare {
        /// Score table (dataset column plus one column per model) to use
        /// instead of evaluation outputs.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Consolidated accuracy and timing tables.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Eda => "eda",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Compare { .. } => "compare",
            Command::Report => "report",
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let root = match (&cli.out, &cfg) {
        (Some(out), _) => out.clone(),
        (None, Some(c)) => c.output_root(),
        (None, None) => return Err(CliError::Config("--config is required (or --out with compare --scores)".into())),
    };
    let layout = Layout::new(root);
    let mut opts = RunOptions {
        datasets: cli.datasets.clone(),
        archs: cli.archs.clone(),
        seed: cli.seed,
        workers: cli.workers,
        per_fold_blocks: cli.per_fold_blocks,
        scores: None,
        alpha: cli.alpha,
    };
    let need_cfg = || cfg.as_ref().ok_or_else(|| CliError::Config("--config is required".into()));
    match cli.command {
        Command::Ingest => commands::ingest(need_cfg()?, &layout, &opts).map(drop),
        Command::Eda => commands::eda(need_cfg()?, &layout, &opts),
        Command::Train => commands::train(need_cfg()?, &layout, &opts),
        Command::Evaluate => commands::evaluate(need_cfg()?, &layout, &opts),
        Command::Compare { ref scores } => {
            opts.scores = scores.clone();
            commands::compare(cfg.as_ref(), &layout, &opts).map(drop)
        }
        Command::Report => commands::report(need_cfg()?, &layout, &opts).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let summary = serde_json::json!({
                "status": "error",
                "command": null,
                "kind": "usage",
                "message": e.kind().to_string(),
            });
            eprintln!("{summary}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json(cli.command.name()));
            ExitCode::FAILURE
        }
    }
}
