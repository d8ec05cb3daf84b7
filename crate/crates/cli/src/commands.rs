use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use frugal_core::arima::{arima_forecast, arima_search_exhaustive, arima_search_stepwise};
use frugal_core::ets::{ets_forecast, ets_select};
use frugal_core::evaluation::{level_key, MsisForm};
use frugal_core::harness::{
    report_fva, run_benchmark_with, run_pool_enumeration, series_seed, BenchReport,
    ExperimentConfig, HarnessError, ProgressEvent,
};
use frugal_core::pools::{AiccForm, Criterion, CriterionKind, ModelPool};
use frugal_core::series::{DataFormat, Dataset, Frequency};
use frugal_core::Forecast;
use thiserror::Error;

use crate::{
    AiccFormArg, BenchArgs, CriterionArg, DataArgs, EnumerateArgs, ForecastArgs, FormatArg,
    FvaArgs, MsisFormArg, RunArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => CliError::Config(e.to_string()),
            HarnessError::Data(_)
            | HarnessError::DatasetMismatch(_)
            | HarnessError::Report { .. } => CliError::Data(e.to_string()),
            HarnessError::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn resolve_format(path: &Path, format: Option<FormatArg>) -> DataFormat {
    match format {
        Some(FormatArg::WideCsv) => DataFormat::WideCsv,
        Some(FormatArg::Jsonl) => DataFormat::Jsonl,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => DataFormat::Jsonl,
            _ => DataFormat::WideCsv,
        },
    }
}

fn load(path: &Path, format: Option<FormatArg>, limit: Option<usize>) -> Result<Dataset> {
    let ds = frugal_core::load_dataset(path, resolve_format(path, format), None)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(match limit {
        Some(n) => ds.truncated(n),
        None => ds,
    })
}

fn load_data(data: &DataArgs) -> Result<Dataset> {
    load(&data.input, data.format, data.limit)
}

fn criterion(run: &RunArgs) -> Criterion {
    let kind = match run.criterion {
        CriterionArg::Aic => CriterionKind::Aic,
        CriterionArg::Bic => CriterionKind::Bic,
        CriterionArg::Aicc => CriterionKind::Aicc,
    };
    let aicc_form = match run.aicc_form {
        AiccFormArg::Standard => AiccForm::Standard,
        AiccFormArg::Paper => AiccForm::Paper,
    };
    Criterion { kind, aicc_form }
}

fn parse_pools(labels: &[String]) -> Result<Vec<ModelPool>> {
    labels
        .iter()
        .map(|l| {
            l.trim()
                .parse()
                .map_err(|e| CliError::Config(format!("{e}")))
        })
        .collect()
}

fn config(run: &RunArgs, pools: Vec<ModelPool>) -> Result<ExperimentConfig> {
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        pools,
        criterion: criterion(run),
        levels: run.levels.clone(),
        seed: run.seed,
        workers: run.workers.unwrap_or(defaults.workers),
        paths: run.paths,
        msis_form: match run.msis_form {
            MsisFormArg::Mean => MsisForm::Mean,
            MsisFormArg::Sum => MsisForm::Sum,
        },
    };
    Ok(cfg.validated()?)
}

fn progress_sink(quiet: bool) -> impl Fn(&ProgressEvent) + Sync {
    move |event: &ProgressEvent| {
        if quiet {
            return;
        }
        if let Ok(line) = serde_json::to_string(event) {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "{line}");
        }
    }
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let cfg = config(&args.run, parse_pools(&args.pools)?)?;
    let dataset = load_data(&args.data)?;
    let report = run_benchmark_with(&cfg, &dataset, &progress_sink(args.run.quiet))?;
    if let Some(path) = &args.out {
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(path, &json)?;
    }
    if let Some(path) = &args.records {
        write_file(path, &report.records_csv()?)?;
    }
    print!("{}", report.summary_text());
    Ok(())
}

pub fn enumerate(args: EnumerateArgs) -> Result<()> {
    let seasonal = args.seasonal && !args.non_seasonal;
    let cfg = config(
        &args.run,
        vec![ModelPool::Ets(frugal_core::pools::EtsPoolName::All)],
    )?;
    let dataset = load_data(&args.data)?;
    let report = run_pool_enumeration(&cfg, &dataset, seasonal)?;
    if let Some(path) = &args.out {
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(path, &json)?;
    }
    if let Some(path) = &args.table {
        write_file(path, &report.pools_csv())?;
    }
    println!(
        "{} balanced pools over {} models, {} series, {} fits",
        report.n_pools,
        report.models.len(),
        report.n_series,
        report.fit_count
    );
    for n in &report.named {
        println!(
            "{:<14} size {:>2}  rank {:>6}/{}  MASE {:.4}  MSIS {:.4}  cost {:.4}s",
            n.name, n.size, n.rank, report.n_pools, n.mase_mean, n.msis_mean, n.cost_mean_seconds
        );
    }
    Ok(())
}

fn read_report(path: &PathBuf) -> Result<BenchReport> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::from(HarnessError::Report {
            path: path.clone(),
            reason: e.to_string(),
        })
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::from(HarnessError::Report {
            path: path.clone(),
            reason: e.to_string(),
        })
    })
}

pub fn fva(args: FvaArgs) -> Result<()> {
    let reports = args
        .reports
        .iter()
        .map(read_report)
        .collect::<Result<Vec<_>>>()?;
    let table = report_fva(&reports, &args.order)?;
    if let Some(path) = &args.csv {
        write_file(path, &table.to_csv())?;
    }
    print!("{}", table.render_text());
    Ok(())
}

fn forecast_series(
    id: &str,
    period: usize,
    values: &[f64],
    h: usize,
    pool: &ModelPool,
    cfg: &ExperimentConfig,
) -> std::result::Result<Forecast, String> {
    match pool {
        ModelPool::ArimaMaxOrder(_) | ModelPool::ArimaStepwise => {
            let search = match pool {
                ModelPool::ArimaMaxOrder(k) => {
                    arima_search_exhaustive(values, period, *k, cfg.criterion)
                }
                _ => arima_search_stepwise(values, period, cfg.criterion),
            }
            .map_err(|e| e.to_string())?;
            arima_forecast(&search.fit, h, &cfg.levels).map_err(|e| e.to_string())
        }
        _ => {
            let specs = pool.ets_specs(period > 1).unwrap_or_default();
            let sel =
                ets_select(values, period, &specs, cfg.criterion).map_err(|e| e.to_string())?;
            let seed = series_seed(cfg.seed, id);
            ets_forecast(&sel.fit, h, &cfg.levels, cfg.paths, seed).map_err(|e| e.to_string())
        }
    }
}

pub fn forecast(args: ForecastArgs) -> Result<()> {
    let pool: ModelPool = args
        .pool
        .parse()
        .map_err(|e| CliError::Config(format!("{e}")))?;
    let cfg = config(&args.run, vec![pool.clone()])?;
    let (id, period, values, default_h) = match (&args.input, &args.values) {
        (Some(path), _) => {
            let ds = load(path, args.format, None)?;
            let found = match &args.id {
                Some(id) => ds.series().iter().find(|s| s.id() == id),
                None => ds.series().first(),
            };
            let s =
                found.ok_or_else(|| CliError::Data(format!("series {:?} not found", args.id)))?;
            (
                s.id().to_string(),
                s.period(),
                s.values().to_vec(),
                s.horizon(),
            )
        }
        (None, Some(values)) => {
            if args.period == 0 {
                return Err(CliError::Config("period must be positive".into()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Data("values must be finite".into()));
            }
            let min_len = frugal_core::series::min_train_len(args.period);
            if values.len() < min_len {
                return Err(CliError::Data(format!(
                    "need at least {min_len} values for period {}",
                    args.period
                )));
            }
            let h = Frequency::from_period(args.period)
                .default_horizon()
                .unwrap_or(1);
            ("input".to_string(), args.period, values.clone(), h)
        }
        (None, None) => {
            return Err(CliError::Config(
                "either --input or --values is required".into(),
            ))
        }
    };
    let h = args.horizon.unwrap_or(default_h);
    if h == 0 {
        return Err(CliError::Config("horizon must be positive".into()));
    }
    let fc = forecast_series(&id, period, &values, h, &pool, &cfg).map_err(CliError::Data)?;

    let mut out = String::from("model,step,point");
    for iv in &fc.intervals {
        let k = level_key(iv.level);
        let _ = write!(out, ",lower_{k},upper_{k}");
    }
    out.push('\n');
    for (i, p) in fc.point.iter().enumerate() {
        let _ = write!(out, "{},{},{p}", fc.source, i + 1);
        for iv in &fc.intervals {
            let _ = write!(out, ",{},{}", iv.lower[i], iv.upper[i]);
        }
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
