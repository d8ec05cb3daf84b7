//! `frugal`: run model-pool benchmarks, enumerate balanced pools, build
//! forecast-value-added tables and forecast single series.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "frugal",
    version,
    about = "Forecasting model-pool benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one or more pools on a dataset with a fixed-origin split.
    Bench(BenchArgs),
    /// Balanced-pool analysis.
    #[command(subcommand)]
    Pools(PoolsCommand),
    /// Reports built from saved benchmark reports.
    #[command(subcommand)]
    Report(ReportCommand),
    /// Forecast a single series beyond its last observation.
    Forecast(ForecastArgs),
}

#[derive(Subcommand)]
enum PoolsCommand {
    /// Score every balanced ETS pool from cached per-model fits.
    Enumerate(EnumerateArgs),
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Forecast-value-added and cost-reduction table.
    Fva(FvaArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    WideCsv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
    Aicc,
}

#[derive(Clone, Copy, ValueEnum)]
enum AiccFormArg {
    Standard,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum MsisFormArg {
    Mean,
    Sum,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file (wide CSV or JSONL).
    #[arg(long)]
    input: PathBuf,
    /// Dataset format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Use only the first N series.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "aicc")]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value = "standard")]
    aicc_form: AiccFormArg,
    /// Comma-separated confidence levels.
    #[arg(long, value_delimiter = ',', default_value = "0.8,0.85,0.9,0.95,0.99")]
    levels: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Sample paths for simulated intervals.
    #[arg(long, default_value_t = frugal_core::ets::DEFAULT_PATHS)]
    paths: usize,
    #[arg(long, value_enum, default_value = "mean")]
    msis_form: MsisFormArg,
    /// Suppress progress lines on standard error.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated pools, e.g. `ets:reduced,ets:all,arima:K2,arima:stepwise`.
    #[arg(long, value_delimiter = ',', required = true)]
    pools: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-series CSV path.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Enumerate pools over all 19 models.
    #[arg(long, conflicts_with = "non_seasonal")]
    seasonal: bool,
    /// Enumerate pools over the 8 non-seasonal models (default).
    #[arg(long)]
    non_seasonal: bool,
    #[command(flatten)]
    run: RunArgs,
    /// JSON summary path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV with one row per pool.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct FvaArgs {
    /// Benchmark reports (JSON) over the same dataset.
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
    /// Pool labels from simplest to most complex.
    #[arg(long, value_delimiter = ',')]
    order: Vec<String>,
    /// Write the table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    /// Dataset file holding the series.
    #[arg(long, required_unless_present = "values")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Series id within the dataset (defaults to the first series).
    #[arg(long)]
    id: Option<String>,
    /// Comma-separated observations instead of a dataset.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    values: Option<Vec<f64>>,
    /// Seasonal period (with `--values`).
    #[arg(long, default_value_t = 1)]
    period: usize,
    /// Steps ahead; defaults to the series horizon.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value = "ets:reduced")]
    pool: String,
    #[command(flatten)]
    run: RunArgs,
    /// Output CSV path (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(a) => commands::bench(a),
        Command::Pools(PoolsCommand::Enumerate(a)) => commands::enumerate(a),
        Command::Report(ReportCommand::Fva(a)) => commands::fva(a),
        Command::Forecast(a) => commands::forecast(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
