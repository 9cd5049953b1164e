//! Command-line front end for the claimtail library.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "claimtail", version, about = "Rank splits of claim totals in heavy-tailed portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact joint transform of (Λ, Ξ, Σ) at finite t
    LtExact(RunArgs),
    /// Limiting joint transform in one regime
    LtLimit(RunArgs),
    /// Closed-form ratio moments over a (gamma, s, k) grid
    Moments(RunArgs),
    /// Empirical transforms from simulated paths, or LePage ratio statistics
    Simulate(RunArgs),
    /// Empirical-vs-limit gaps over a grid of horizons
    Converge(RunArgs),
    /// Correlation of R_(0)² and T_∞ over a gamma grid
    Corr(RunArgs),
    /// Built-in identity suite
    Check(RunArgs),
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl From<claimtail::Error> for CliError {
    fn from(e: claimtail::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let args = match &cli.command {
        Command::LtExact(a)
        | Command::LtLimit(a)
        | Command::Moments(a)
        | Command::Simulate(a)
        | Command::Converge(a)
        | Command::Corr(a)
        | Command::Check(a) => a,
    };
    let cfg = RunConfig::resolve(args)?;
    if args.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return Ok(ExitCode::SUCCESS);
    }
    match cli.command {
        Command::LtExact(_) => commands::lt_exact(&cfg)?,
        Command::LtLimit(_) => commands::lt_limit(&cfg)?,
        Command::Moments(_) => commands::moments(&cfg)?,
        Command::Simulate(_) => commands::simulate(&cfg)?,
        Command::Converge(_) => commands::converge(&cfg)?,
        Command::Corr(_) => commands::corr(&cfg)?,
        Command::Check(_) => {
            if !commands::check() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
