//! `bess`: day-ahead allocation of battery capacity between feeder dispatch
//! and primary frequency regulation, plus closed-loop simulation.
//!
//! Exit status: 0 success, 1 validation error, 2 day-ahead problem infeasible
//! beyond the fallback ladder, 3 internal error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bess_core::lp::LpError;
use bess_core::scheduler::ScheduleError;
use bess_core::simulator::SimError;

#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Infeasible(String),
    Internal(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Infeasible(_) => 2,
            AppError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::Infeasible(m) | AppError::Internal(m) => m,
        }
    }
}

impl From<ScheduleError> for AppError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::Infeasible => AppError::Infeasible(e.to_string()),
            ScheduleError::Internal(_) | ScheduleError::Lp(_) => AppError::Internal(e.to_string()),
            other => AppError::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for AppError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Schedule(inner) => inner.into(),
            SimError::Plant(_) | SimError::Control(_) => AppError::Internal(e.to_string()),
            other => AppError::Validation(other.to_string()),
        }
    }
}

impl From<LpError> for AppError {
    fn from(e: LpError) -> Self {
        AppError::Internal(e.to_string())
    }
}

impl From<bess_core::data_io::DataIoError> for AppError {
    fn from(e: bess_core::data_io::DataIoError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<bess_core::budgets::BudgetError> for AppError {
    fn from(e: bess_core::budgets::BudgetError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<bess_core::freq_stats::FreqStatsError> for AppError {
    fn from(e: bess_core::freq_stats::FreqStatsError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "bess",
    about = "Battery storage service stacking: dispatch tracking plus primary frequency regulation",
    version
)]
struct Cli {
    /// TOML configuration file (defaults reproduce the 560 kWh / 720 kVA setup)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the frequency-deviation energy envelope from 1 Hz frequency archives
    FitEnvelope(FitEnvelopeArgs),
    /// Solve the day-ahead allocation and write a plan file
    Schedule(ScheduleArgs),
    /// Run the 1 Hz closed loop over one or more days
    Simulate(SimulateArgs),
    /// Aggregate report files into a mean/max/min summary table
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct FitEnvelopeArgs {
    /// Frequency CSV archives (epoch_seconds,frequency_hz), one or more days
    #[arg(long = "freq", required = true, num_args = 1.., value_name = "PATH")]
    freq: Vec<PathBuf>,
    /// Confidence multiplier for the envelope half-width
    #[arg(long, value_name = "Z")]
    confidence_z: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    /// Scenario file: slot,l_hat_kw,l_up_kw,l_down_kw
    #[arg(long, value_name = "PATH")]
    forecast: PathBuf,
    /// Envelope file written by fit-envelope
    #[arg(long, value_name = "PATH")]
    envelope: PathBuf,
    /// Initial stored energy (overrides the config)
    #[arg(long = "e-init", value_name = "KWH")]
    e_init: Option<f64>,
    /// Objective: max-alpha, revenue or feasibility
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Date label stored in the plan file
    #[arg(long, value_name = "YYYY-MM-DD", default_value = "1970-01-01")]
    date: String,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Use the seeded synthetic scenario generator instead of data files
    #[arg(long)]
    synthetic: bool,
    /// Seed for the synthetic generator (overrides the config)
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Number of synthetic days (overrides the config)
    #[arg(long, value_name = "N")]
    days: Option<usize>,
    /// Pre-solved plan file (file-based runs; otherwise scheduled inline)
    #[arg(long, value_name = "PATH")]
    plan: Option<PathBuf>,
    /// Scenario file (required for file-based runs)
    #[arg(long, value_name = "PATH")]
    forecast: Option<PathBuf>,
    /// Envelope file (required for file-based runs)
    #[arg(long, value_name = "PATH")]
    envelope: Option<PathBuf>,
    /// 1 Hz load realization: epoch_seconds,load_kw
    #[arg(long, value_name = "PATH")]
    load: Option<PathBuf>,
    /// 1 Hz frequency realization: epoch_seconds,frequency_hz
    #[arg(long, value_name = "PATH")]
    freq: Option<PathBuf>,
    /// Initial stored energy (overrides plan/config)
    #[arg(long = "e-init", value_name = "KWH")]
    e_init: Option<f64>,
    /// Objective: max-alpha, revenue or feasibility
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json files to aggregate
    #[arg(required = true, value_name = "REPORT")]
    reports: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match config::Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let result = match cli.command {
        Command::FitEnvelope(args) => commands::fit_envelope::run(&config, &args),
        Command::Schedule(args) => commands::schedule::run(&config, &args),
        Command::Simulate(args) => commands::simulate::run(&config, &args),
        Command::Report(args) => commands::report::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
