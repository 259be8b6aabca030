//! `oversmooth`: Tikhonov regularization with an oversmoothing H¹ penalty on
//! the exponential growth model, with balancing-principle parameter choice
//! and scripted case-study reproduction.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver or rule failure.
//! stdout carries the written artifact paths, one per line; diagnostics go to
//! stderr.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::ReproduceTarget;
use config::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "oversmooth", version, about)]
struct Cli {
    /// TOML run configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides output_dir in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for experiment cells (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the Tikhonov functional for one α or along the α-grid.
    Solve,
    /// Run a parameter-choice rule over the reconstruction path.
    Select,
    /// Re-run a scripted case study: table1, figure1, figure2 or figure3.
    Reproduce {
        /// table1 | figure1 | figure2 | figure3
        target: String,
    },
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.noise.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.to_string_lossy().into_owned());
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    }
    let config = effective_config(cli)?;
    let out = PathBuf::from(
        config
            .output_dir
            .clone()
            .unwrap_or_else(|| "out".to_string()),
    );
    match &cli.command {
        Command::Solve => commands::command_solve(&config, &out),
        Command::Select => commands::command_select(&config, &out),
        Command::Reproduce { target } => {
            let target = ReproduceTarget::parse(target)?;
            commands::command_reproduce(target, &config, &out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with its own code; keep 1 for usage problems
            // and 0 for --help/--version.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(artifacts) => {
            for path in artifacts {
                println!("{}", path.display());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
