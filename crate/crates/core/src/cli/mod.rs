//! Command-line front end: `analyze`, `stats` and `bench`.

mod analyze;
mod bench;
mod output;
mod table;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, ErrorClass, Result};
use crate::series_prep::PriceField;

pub use analyze::{cmd_analyze, phase_summaries, PhaseSummary};
pub use bench::{cmd_bench, BenchReport, BenchScenario};
pub use table::{cmd_stats, SummaryTable};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_COMPUTATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tops", version, about = "Thermal optimal path lead-lag analysis of VIX and VIX futures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline: splice, returns, TOPS ensemble, self-consistency, phases.
    Analyze(AnalyzeArgs),
    /// Summary statistics, normality and unit-root tests, correlations.
    Stats(StatsArgs),
    /// Synthetic recovery benchmarks from a scenario file.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Spot index CSV (date,close)
    #[arg(long)]
    pub vix: PathBuf,
    /// Futures panel CSV (date,contract,expiry,close,settle,volume)
    #[arg(long)]
    pub futures: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = PriceField::Close)]
    pub price_field: PriceField,
    #[arg(long, default_value_t = 2.0)]
    pub temperature: f64,
    /// Largest ensemble start offset M; (M+1)^2 members
    #[arg(long, default_value_t = 30)]
    pub margin: usize,
    /// Self-consistency window in trading days
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    /// Also run every window size in 5..=60 and write the majority mask
    #[arg(long)]
    pub sweep_windows: bool,
    /// Accept a window outside 5..=60
    #[arg(long)]
    pub allow_any_window: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Comma-separated phase break dates
    #[arg(long, value_delimiter = ',', default_value = "2006-02-24,2009-01-29")]
    pub phases: Vec<NaiveDate>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Scenario JSON file
    pub scenarios: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for scenarios that do not set their own
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Default temperature for lag scenarios
    #[arg(long, default_value_t = 2.0)]
    pub temperature: f64,
    /// Default ensemble margin for lag scenarios
    #[arg(long, default_value_t = 30)]
    pub margin: usize,
    /// Leave the wall-clock column empty so reports are reproducible
    #[arg(long)]
    pub omit_runtime: bool,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(|_| ()),
        Command::Stats(a) => cmd_stats(a).map(|_| ()),
        Command::Bench(a) => cmd_bench(a).map(|_| ()),
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Input => EXIT_INPUT,
        ErrorClass::Computation => EXIT_COMPUTATION,
    }
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
