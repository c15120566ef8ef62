//! `molbench` CLI: run reproducible molecular-ML benchmarks from a flat
//! key/value config file with optional command-line overrides.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stage failure.

use clap::{Parser, Subcommand};
use molbench::harness::{
    config_from_map, emit_report, parse_flat, render_markdown, run_benchmark, HarnessError,
    ReportFormat,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "molbench", version, about = "Molecular ML benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark described by a config file (plus overrides).
    Run {
        /// Flat key/value config file; every key can also be set by an
        /// override flag.
        #[arg(long)]
        config: Option<PathBuf>,

        /// Dataset: smoke | smoke_regression | csv
        #[arg(long)]
        dataset: Option<String>,

        /// Featurizer: ecfp | graph | weave
        #[arg(long)]
        featurizer: Option<String>,

        /// Model: logreg | krr | irv | multitask | bypass | graphconv
        #[arg(long)]
        model: Option<String>,

        /// Split: random | scaffold | stratified | time
        #[arg(long)]
        split: Option<String>,

        /// Metric: auto | roc_auc | prc_auc | rmse | mae
        #[arg(long)]
        metric: Option<String>,

        /// Base seed for splits and training.
        #[arg(long)]
        seed: Option<u64>,

        /// Number of seeded repeats.
        #[arg(long)]
        repeats: Option<usize>,

        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,

        /// Report format for --out: json | csv | markdown
        #[arg(long, default_value = "json")]
        format: String,
    },
}

fn run(cli: Cli) -> Result<(), (u8, String)> {
    let Command::Run {
        config,
        dataset,
        featurizer,
        model,
        split,
        metric,
        seed,
        repeats,
        out,
        format,
    } = cli.command;

    let mut map: BTreeMap<String, String> = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (2, format!("config {}: {e}", path.display())))?;
            parse_flat(&text).map_err(|e| (2, e.to_string()))?
        }
        None => BTreeMap::new(),
    };
    let overrides = [
        ("dataset", dataset),
        ("featurizer", featurizer),
        ("model", model),
        ("split", split),
        ("metric", metric),
        ("seed", seed.map(|v| v.to_string())),
        ("repeats", repeats.map(|v| v.to_string())),
        ("out", out.map(|v| v.display().to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            map.insert(key.to_string(), v);
        }
    }
    let cfg = config_from_map(&map).map_err(|e| (2, e.to_string()))?;
    let report_format: ReportFormat = format.parse().map_err(|e: String| (2, e))?;

    let report = run_benchmark(&cfg).map_err(|e| match e {
        HarnessError::Config(_) | HarnessError::EmptySpace => (2, e.to_string()),
        HarnessError::IncompatibleModelFeaturizer { .. } => (2, e.to_string()),
        HarnessError::Stage { .. } => (3, e.to_string()),
    })?;

    print!("{}", render_markdown(&report));
    if let Some(timing) = &report.timing {
        eprintln!(
            "molbench: load {:.2}s featurize {:.2}s train {:.2}s evaluate {:.2}s total {:.2}s",
            timing.load_seconds,
            timing.featurize_seconds,
            timing.train_seconds,
            timing.evaluate_seconds,
            timing.total_seconds
        );
    }
    if let Some(path) = &cfg.out {
        emit_report(&report, report_format, path).map_err(|e| (3, e.to_string()))?;
        eprintln!("molbench: report written to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("molbench: error: {message}");
            ExitCode::from(code)
        }
    }
}
