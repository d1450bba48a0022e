//! `qht`: runs one experiment and writes a CSV table with a JSON schema and run manifest.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;
use thiserror::Error;

use config::{ConfigError, ExperimentConfig, Params};
use experiments::Experiment;
use output::{sidecar, write_csv, write_json};

#[derive(Parser, Debug)]
#[command(name = "qht", version, about = "Quantum hypothesis testing experiments")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry; may be repeated. Overrides win over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path; `<out>.schema.json` and `<out>.manifest.json` are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Error)]
enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("environment variable QHT_THREADS: {0}")]
    Threads(String),
    #[error("computation failed: {0}")]
    Library(#[from] qht_core::QhtError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl AppError {
    fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Config(_) | AppError::Threads(_) => ExitCode::from(2),
            AppError::Library(_) | AppError::Write { .. } => ExitCode::from(1),
        }
    }
}

fn configure_threads() -> Result<Option<usize>, AppError> {
    let Ok(raw) = std::env::var("QHT_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| AppError::Threads(format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| AppError::Threads(e.to_string()))?;
    Ok(Some(n))
}

fn run(cli: Cli) -> Result<usize, AppError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let thread_cap = configure_threads()?;
    let name = cli.experiment.name();
    let cfg = ExperimentConfig::load(&name, cli.config.as_deref(), &cli.set, cli.out)?;

    let mut params = Params::new(&cfg.params);
    let plan = experiments::plan(cli.experiment, &mut params);
    let resolved = params.finish()?;
    let plan = plan.expect("a plan exists whenever validation succeeds");
    let table = experiments::execute(plan, cfg.seed)?;

    let write_err = |path: &PathBuf| {
        let path = path.clone();
        move |source| AppError::Write { path, source }
    };
    if let Some(dir) = cfg.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(write_err(&dir.to_path_buf()))?;
    }
    let schema_path = sidecar(&cfg.out, ".schema.json");
    let manifest_path = sidecar(&cfg.out, ".manifest.json");
    write_csv(&table, &cfg.out).map_err(write_err(&cfg.out))?;
    write_json(&table.schema(&name, &cfg.out), &schema_path).map_err(write_err(&schema_path))?;
    let file_name = |p: &PathBuf| p.file_name().map(|f| f.to_string_lossy().into_owned());
    let manifest = json!({
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "parameters": resolved,
        "config_file": cli.config.as_ref().map(|p| p.display().to_string()),
        "overrides": cli.set,
        "outputs": {
            "data": file_name(&cfg.out),
            "schema": file_name(&schema_path),
        },
        "rows": table.rows.len(),
        "versions": {
            "qht-cli": env!("CARGO_PKG_VERSION"),
            "qht-core": qht_core::VERSION,
        },
        "threads": {
            "cap": thread_cap,
            "used": rayon::current_num_threads(),
        },
        "started_unix": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
    });
    write_json(&manifest, &manifest_path).map_err(write_err(&manifest_path))?;
    Ok(table.rows.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok(rows) => {
            eprintln!("qht: wrote {rows} rows to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qht: error: {e}");
            e.exit_code()
        }
    }
}
