use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{ExperimentConfig, Scale};

/// Variational search for quantum many-body scars.
#[derive(Parser, Debug)]
#[command(name = "scarhunt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for scans and sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Full)]
    scale: Scale,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Exact diagonalization with entanglement and scar detection.
    Diag,
    /// Check the analytic scars against the exact spectrum.
    ValidateScar,
    /// One training run.
    Train,
    /// Target-energy scan.
    Scan,
    /// Sweep of the cost weights over the simplex.
    Sweep,
    /// Quench dynamics from a scar, Fock or trained state.
    Dynamics,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl CliError {
    pub fn config(e: impl fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn missing(section: &str) -> Self {
        CliError::Config(format!("missing section `[{section}]`"))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    fn record(&self) -> String {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Compute(m) => ("computation", m),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<scarhunt::error::Error> for CliError {
    fn from(e: scarhunt::error::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path, cli.scale)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = commands::Context {
        cfg,
        out,
        workers: cli.workers,
    };
    match cli.command {
        Command::Diag => commands::diag(&ctx),
        Command::ValidateScar => commands::validate_scar(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Dynamics => commands::dynamics(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.code())
        }
    }
}
