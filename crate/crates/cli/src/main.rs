//! Config-driven experiment runner for the sojourn-time laboratory.
//!
//! `sojourn run <config.toml>` executes one experiment and writes a CSV
//! table, a JSON summary, and an SVG convergence plot; `sojourn validate
//! <config.toml>` checks the schema and echoes the normalized config.
//!
//! Exit codes: 0 success, 2 schema violation (with the offending field
//! path), 3 numerical non-convergence (with the flagged stage).

mod config;
mod experiments;
mod plot;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use experiments::RunError;
use report::{config_hash, RunSummary, SUMMARY_SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "sojourn", about = "sojourn-time and time-delay experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// directory for output artifacts (created if missing)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// size of the worker thread pool (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// overrides the seed from the config file
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// execute the experiment and write CSV/JSON/SVG artifacts
    Run { config: PathBuf },
    /// check the schema and cross-field constraints without running
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(context: &str, e: std::io::Error) -> Failure {
        Failure {
            code: 1,
            message: format!("{context}: {e}"),
        }
    }
}

impl From<config::SchemaError> for Failure {
    fn from(e: config::SchemaError) -> Self {
        Failure {
            code: 2,
            message: format!("config error at {e}"),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match &e {
            RunError::Schema(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Internal(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(&format!("reading {}", path.display()), e))?;
    let config = config::parse(&text)?;
    config.validate()?;
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure {
                code: 1,
                message: format!("thread pool: {e}"),
            })?;
    }
    match &cli.command {
        Command::Validate { config: path } => {
            let config = load(path)?;
            print!("{}", config.normalized());
            println!("ok");
            Ok(())
        }
        Command::Run { config: path } => {
            let config = load(path)?;
            let seed = cli.seed.unwrap_or(config.seed);
            let output = experiments::run(&config, seed)?;

            let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::io(&format!("creating {}", out_dir.display()), e))?;
            let csv_path = out_dir.join(&config.output.csv);
            let svg_path = out_dir.join(&config.output.svg);
            let json_path = out_dir.join(&config.output.json);

            fs::write(&csv_path, output.table.to_csv_bytes())
                .map_err(|e| Failure::io(&format!("writing {}", csv_path.display()), e))?;
            fs::write(&svg_path, output.plot.render())
                .map_err(|e| Failure::io(&format!("writing {}", svg_path.display()), e))?;

            let pass = output.checks.iter().all(|c| c.pass);
            let summary = RunSummary {
                schema_version: SUMMARY_SCHEMA_VERSION,
                experiment: config.experiment.name(),
                config_hash: config_hash(&config.normalized()),
                seed,
                pass,
                checks: output.checks,
                details: output.details,
                // names, not paths: summaries stay byte-identical across
                // --out-dir choices
                artifacts: vec![
                    config.output.csv.clone(),
                    config.output.json.clone(),
                    config.output.svg.clone(),
                ],
            };
            fs::write(&json_path, summary.to_json_bytes())
                .map_err(|e| Failure::io(&format!("writing {}", json_path.display()), e))?;

            println!(
                "{}: {} ({} checks, artifacts in {})",
                config.experiment.name(),
                if pass { "pass" } else { "fail" },
                summary.checks.len(),
                out_dir.display()
            );
            Ok(())
        }
    }
}
