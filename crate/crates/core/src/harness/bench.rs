use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::arima::{arima_forecast, arima_search_exhaustive, arima_search_stepwise, ArimaOrder};
use crate::ets::{ets_forecast, ets_select, EtsModelSpec};
use crate::evaluation::{
    calibration, coverage, dm_test_modified, level_key, mase, monetize, msis_with,
    order_change_frequencies, profile_frequencies, Calibration, EvalError, EvaluationRecord, Loss,
    MsisForm, CPU_HOUR_RATE,
};
use crate::forecast::Forecast;
use crate::pools::{Criterion, ModelPool};
use crate::series::{Dataset, Fnv1a, TimeSeries};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// A forecast is explosive when some step exceeds this multiple of the
/// largest absolute training value.
pub const EXPLOSIVE_FACTOR: f64 = 10.0;
/// Significance level used to classify DM outcomes.
const DM_ALPHA: f64 = 0.05;

/// Seed of the random stream for one series.
pub fn series_seed(seed: u64, id: &str) -> u64 {
    let mut h = Fnv1a::default();
    h.write(&seed.to_le_bytes());
    h.write(id.as_bytes());
    h.finish()
}

/// Progress notifications emitted while a benchmark runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProgressEvent {
    Done {
        series_id: String,
        pool: String,
        model: String,
        seconds: f64,
    },
    Skip {
        series_id: String,
        pool: String,
        reason: String,
    },
}

/// A series/pool pair that produced no record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub series_id: String,
    pub pool: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Forecast of the selected model for one series and pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub series_id: String,
    pub pool: String,
    pub model: String,
    pub point: Vec<f64>,
    pub intervals: BTreeMap<String, Bounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplosiveEntry {
    pub series_id: String,
    pub model: String,
    pub multiplicative_trend: bool,
}

/// Series whose forecasts blew up, with the selected models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplosiveSummary {
    pub count: usize,
    /// How many of them selected a multiplicative-trend model.
    pub multiplicative_trend: usize,
    pub series: Vec<ExplosiveEntry>,
}

/// Aggregates for one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub label: String,
    pub n_records: usize,
    pub n_skipped: usize,
    pub mase_mean: Option<f64>,
    pub msis_mean: BTreeMap<String, f64>,
    pub coverage: BTreeMap<String, Calibration>,
    pub cost_mean_seconds: Option<f64>,
    pub cost_total_seconds: f64,
    /// Mean cost divided by the mean cost of the first pool.
    pub cost_ratio: Option<f64>,
    pub cost_usd: f64,
    /// Percentage of series per profile class (ETS pools only).
    pub profile_frequencies: Option<BTreeMap<String, f64>>,
    pub explosive: ExplosiveSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmOutcome {
    ABetter,
    BBetter,
    NoDifference,
    Insufficient,
}

/// Modified DM test between two pools at one horizon step, pairing the
/// absolute errors of series that both pools forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmCell {
    pub pool_a: String,
    pub pool_b: String,
    pub step: usize,
    pub m: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub outcome: DmOutcome,
}

/// Percentage of series whose selected ARIMA terms differ between two
/// exhaustive pools `K` and `K - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderChangeRow {
    pub pool: String,
    pub previous: String,
    pub n_series: usize,
    pub p: f64,
    pub q: f64,
    pub seasonal_p: f64,
    pub seasonal_q: f64,
    pub any: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub fingerprint: String,
    pub frequency: String,
    pub n_series: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub pools: Vec<String>,
    pub criterion: Criterion,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub paths: usize,
    pub msis_form: MsisForm,
}

/// Machine description; absolute costs only compare within one host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub workers: usize,
    pub seed: u64,
    pub version: String,
}

impl Environment {
    fn current(workers: usize, seed: u64) -> Environment {
        let host = std::fs::read_to_string("/proc/sys/kernel/hostname")
            .ok()
            .or_else(|| std::env::var("HOSTNAME").ok())
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".into());
        Environment {
            host,
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            workers,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Full outcome of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub dataset: DatasetInfo,
    pub config: ConfigEcho,
    pub environment: Environment,
    pub pools: Vec<PoolSummary>,
    pub dm_matrix: Vec<DmCell>,
    pub order_changes: Vec<OrderChangeRow>,
    /// Sorted by pool (configuration order), then series id.
    pub records: Vec<EvaluationRecord>,
    /// Same order as `records`.
    pub forecasts: Vec<ForecastEntry>,
    pub skips: Vec<Skip>,
}

impl BenchReport {
    /// Copy with every timing and machine-dependent field cleared; two runs
    /// with the same dataset and configuration agree on this view exactly.
    pub fn without_timings(&self) -> BenchReport {
        let mut r = self.clone();
        r.environment.host.clear();
        r.environment.workers = 0;
        for rec in &mut r.records {
            rec.cost_seconds = 0.0;
        }
        for p in &mut r.pools {
            p.cost_mean_seconds = None;
            p.cost_total_seconds = 0.0;
            p.cost_ratio = None;
            p.cost_usd = 0.0;
        }
        r
    }

    pub fn pool(&self, label: &str) -> Option<&PoolSummary> {
        self.pools.iter().find(|p| p.label == label)
    }

    pub fn records_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a EvaluationRecord> {
        self.records.iter().filter(move |r| r.pool_label == label)
    }
}

/// What a single series/pool evaluation produced.
struct Outcome {
    record: EvaluationRecord,
    forecast: ForecastEntry,
    ets_spec: Option<EtsModelSpec>,
    arima_order: Option<ArimaOrder>,
}

struct Selected {
    model: String,
    criterion: f64,
    forecast: Forecast,
    ets_spec: Option<EtsModelSpec>,
    arima_order: Option<ArimaOrder>,
}

fn select_and_forecast(
    train: &[f64],
    period: usize,
    h: usize,
    pool: &ModelPool,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Selected, String> {
    let crit = config.criterion;
    let levels = &config.levels;
    match pool {
        ModelPool::ArimaMaxOrder(_) | ModelPool::ArimaStepwise => {
            let search = match pool {
                ModelPool::ArimaMaxOrder(k) => arima_search_exhaustive(train, period, *k, crit),
                _ => arima_search_stepwise(train, period, crit),
            }
            .map_err(|e| e.to_string())?;
            let forecast = arima_forecast(&search.fit, h, levels).map_err(|e| e.to_string())?;
            Ok(Selected {
                model: search.fit.order.to_string(),
                criterion: search.criterion,
                forecast,
                ets_spec: None,
                arima_order: Some(search.fit.order),
            })
        }
        _ => {
            let specs = pool
                .ets_specs(period > 1)
                .expect("non-ARIMA pools are ETS pools");
            let sel = ets_select(train, period, &specs, crit).map_err(|e| e.to_string())?;
            let forecast =
                ets_forecast(&sel.fit, h, levels, config.paths, seed).map_err(|e| e.to_string())?;
            Ok(Selected {
                model: sel.fit.spec.to_string(),
                criterion: sel.criterion,
                forecast,
                ets_spec: Some(sel.fit.spec),
                arima_order: None,
            })
        }
    }
}

fn evaluate(
    series: &TimeSeries,
    pool: &ModelPool,
    config: &ExperimentConfig,
) -> Result<Outcome, String> {
    let split = series.split();
    let (train, test) = (split.train(), split.test());
    let period = series.period();
    let h = split.horizon();
    let seed = series_seed(config.seed, series.id());

    let started = Instant::now();
    let sel = select_and_forecast(train, period, h, pool, config, seed)?;
    let cost_seconds = started.elapsed().as_secs_f64();

    let fc = &sel.forecast;
    let finite = fc.point.iter().all(|v| v.is_finite())
        && fc
            .intervals
            .iter()
            .all(|iv| iv.lower.iter().chain(&iv.upper).all(|v| v.is_finite()));
    if !finite {
        return Err(format!("{}: non-finite forecast", sel.model));
    }
    let eval_err = |e: EvalError| e.to_string();
    let mase_v = mase(train, test, &fc.point, period).map_err(eval_err)?;
    let mut msis = BTreeMap::new();
    let mut covered = BTreeMap::new();
    let mut intervals = BTreeMap::new();
    for iv in &fc.intervals {
        let key = level_key(iv.level);
        let v = msis_with(
            train,
            test,
            &iv.lower,
            &iv.upper,
            1.0 - iv.level,
            period,
            config.msis_form,
        )
        .map_err(eval_err)?;
        msis.insert(key.clone(), v);
        covered.insert(key.clone(), coverage(test, &iv.lower, &iv.upper));
        intervals.insert(
            key,
            Bounds {
                lower: iv.lower.clone(),
                upper: iv.upper.clone(),
            },
        );
    }
    let scale = train.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let explosive = fc.point.iter().any(|v| v.abs() > EXPLOSIVE_FACTOR * scale);
    let abs_errors = test
        .iter()
        .zip(&fc.point)
        .map(|(y, f)| (y - f).abs())
        .collect();
    let pool_label = pool.label();
    Ok(Outcome {
        record: EvaluationRecord {
            series_id: series.id().to_string(),
            pool_label: pool_label.clone(),
            selected_model: sel.model.clone(),
            criterion: sel.criterion,
            mase: mase_v,
            msis,
            covered,
            cost_seconds,
            abs_errors,
            explosive,
        },
        forecast: ForecastEntry {
            series_id: series.id().to_string(),
            pool: pool_label,
            model: sel.model,
            point: fc.point.clone(),
            intervals,
        },
        ets_spec: sel.ets_spec,
        arima_order: sel.arima_order,
    })
}

/// Run every pool on every series of `dataset` and assemble the report.
pub fn run_benchmark(
    config: &ExperimentConfig,
    dataset: &Dataset,
) -> Result<BenchReport, HarnessError> {
    run_benchmark_with(config, dataset, &|_| {})
}

/// As [`run_benchmark`], calling `progress` from the worker threads after
/// each series/pool pair.
pub fn run_benchmark_with(
    config: &ExperimentConfig,
    dataset: &Dataset,
    progress: &(dyn Fn(&ProgressEvent) + Sync),
) -> Result<BenchReport, HarnessError> {
    let config = config.validated()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;

    let per_series: Vec<Vec<Result<Outcome, Skip>>> = pool.install(|| {
        dataset
            .series()
            .par_iter()
            .map(|series| {
                config
                    .pools
                    .iter()
                    .map(|p| match evaluate(series, p, &config) {
                        Ok(o) => {
                            progress(&ProgressEvent::Done {
                                series_id: o.record.series_id.clone(),
                                pool: o.record.pool_label.clone(),
                                model: o.record.selected_model.clone(),
                                seconds: o.record.cost_seconds,
                            });
                            Ok(o)
                        }
                        Err(reason) => {
                            let skip = Skip {
                                series_id: series.id().to_string(),
                                pool: p.label(),
                                reason,
                            };
                            progress(&ProgressEvent::Skip {
                                series_id: skip.series_id.clone(),
                                pool: skip.pool.clone(),
                                reason: skip.reason.clone(),
                            });
                            Err(skip)
                        }
                    })
                    .collect()
            })
            .collect()
    });

    // Regroup by pool, each sorted by series id.
    let n_pools = config.pools.len();
    let mut by_pool: Vec<Vec<Outcome>> = (0..n_pools).map(|_| Vec::new()).collect();
    let mut skips = Vec::new();
    for row in per_series {
        for (i, r) in row.into_iter().enumerate() {
            match r {
                Ok(o) => by_pool[i].push(o),
                Err(s) => skips.push(s),
            }
        }
    }
    for outs in &mut by_pool {
        outs.sort_by(|a, b| a.record.series_id.cmp(&b.record.series_id));
    }
    let pool_index: HashMap<String, usize> = config
        .pools
        .iter()
        .enumerate()
        .map(|(i, p)| (p.label(), i))
        .collect();
    skips.sort_by(|a, b| {
        (pool_index[&a.pool], &a.series_id).cmp(&(pool_index[&b.pool], &b.series_id))
    });

    let mut summaries = Vec::with_capacity(n_pools);
    for (i, p) in config.pools.iter().enumerate() {
        let n_skipped = skips.iter().filter(|s| pool_index[&s.pool] == i).count();
        summaries.push(summarize(p, &by_pool[i], n_skipped, &config.levels));
    }
    let base_cost = summaries.first().and_then(|s| s.cost_mean_seconds);
    for s in &mut summaries {
        s.cost_ratio = match (s.cost_mean_seconds, base_cost) {
            (Some(c), Some(b)) if b > 0.0 => Some(c / b),
            _ => None,
        };
    }

    let dm_matrix = dm_matrix(&config.pools, &by_pool);
    let order_changes = order_changes(&config.pools, &by_pool);

    let mut records = Vec::new();
    let mut forecasts = Vec::new();
    for outs in by_pool {
        for o in outs {
            records.push(o.record);
            forecasts.push(o.forecast);
        }
    }
    Ok(BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        dataset: DatasetInfo {
            fingerprint: format!("{:016x}", dataset.fingerprint()),
            frequency: dataset.frequency().to_string(),
            n_series: dataset.len(),
        },
        config: ConfigEcho {
            pools: config.pools.iter().map(|p| p.label()).collect(),
            criterion: config.criterion,
            levels: config.levels.clone(),
            seed: config.seed,
            paths: config.paths,
            msis_form: config.msis_form,
        },
        environment: Environment::current(config.workers, config.seed),
        pools: summaries,
        dm_matrix,
        order_changes,
        records,
        forecasts,
        skips,
    })
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(pool: &ModelPool, outs: &[Outcome], n_skipped: usize, levels: &[f64]) -> PoolSummary {
    let recs: Vec<&EvaluationRecord> = outs.iter().map(|o| &o.record).collect();
    let mut msis_mean = BTreeMap::new();
    let mut cov = BTreeMap::new();
    for &level in levels {
        let key = level_key(level);
        if let Some(m) = mean_of(recs.iter().filter_map(|r| r.msis.get(&key).copied())) {
            msis_mean.insert(key.clone(), m);
        }
        let flags: Vec<&[bool]> = recs
            .iter()
            .filter_map(|r| r.covered.get(&key).map(|v| v.as_slice()))
            .collect();
        if let Ok(c) = calibration(&flags) {
            cov.insert(key, c);
        }
    }
    let cost_total: f64 = recs.iter().map(|r| r.cost_seconds).sum();
    let profile = pool.is_ets().then(|| {
        let specs: Vec<EtsModelSpec> = outs.iter().filter_map(|o| o.ets_spec).collect();
        profile_frequencies(&specs)
            .into_iter()
            .map(|(c, v)| {
                let key = serde_json::to_value(c)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                (key, v)
            })
            .collect()
    });
    let mut explosive = ExplosiveSummary::default();
    for o in outs.iter().filter(|o| o.record.explosive) {
        let mult = o.ets_spec.is_some_and(|s| s.trend.is_multiplicative());
        explosive.count += 1;
        explosive.multiplicative_trend += usize::from(mult);
        explosive.series.push(ExplosiveEntry {
            series_id: o.record.series_id.clone(),
            model: o.record.selected_model.clone(),
            multiplicative_trend: mult,
        });
    }
    PoolSummary {
        label: pool.label(),
        n_records: recs.len(),
        n_skipped,
        mase_mean: mean_of(recs.iter().map(|r| r.mase)),
        msis_mean,
        coverage: cov,
        cost_mean_seconds: mean_of(recs.iter().map(|r| r.cost_seconds)),
        cost_total_seconds: cost_total,
        cost_ratio: None,
        cost_usd: monetize(cost_total, CPU_HOUR_RATE),
        profile_frequencies: profile,
        explosive,
    }
}

fn dm_matrix(pools: &[ModelPool], by_pool: &[Vec<Outcome>]) -> Vec<DmCell> {
    let maps: Vec<BTreeMap<&str, &[f64]>> = by_pool
        .iter()
        .map(|outs| {
            outs.iter()
                .map(|o| (o.record.series_id.as_str(), o.record.abs_errors.as_slice()))
                .collect()
        })
        .collect();
    let max_h = by_pool
        .iter()
        .flatten()
        .map(|o| o.record.abs_errors.len())
        .max()
        .unwrap_or(0);
    let mut cells = Vec::new();
    for a in 0..pools.len() {
        for b in a + 1..pools.len() {
            for step in 0..max_h {
                let (ea, eb): (Vec<f64>, Vec<f64>) = maps[a]
                    .iter()
                    .filter_map(|(id, ea)| {
                        let eb = maps[b].get(id)?;
                        Some((*ea.get(step)?, *eb.get(step)?))
                    })
                    .unzip();
                let m = ea.len();
                let (statistic, p_value, outcome) =
                    match dm_test_modified(&ea, &eb, 1, Loss::Absolute) {
                        Ok(r) => {
                            let outcome = if r.p_value >= DM_ALPHA {
                                DmOutcome::NoDifference
                            } else if r.statistic < 0.0 {
                                DmOutcome::ABetter
                            } else {
                                DmOutcome::BBetter
                            };
                            (Some(r.statistic), Some(r.p_value), outcome)
                        }
                        Err(EvalError::DegenerateVariance) => (None, None, DmOutcome::NoDifference),
                        Err(_) => (None, None, DmOutcome::Insufficient),
                    };
                cells.push(DmCell {
                    pool_a: pools[a].label(),
                    pool_b: pools[b].label(),
                    step: step + 1,
                    m,
                    statistic,
                    p_value,
                    outcome,
                });
            }
        }
    }
    cells
}

fn order_changes(pools: &[ModelPool], by_pool: &[Vec<Outcome>]) -> Vec<OrderChangeRow> {
    let mut rows = Vec::new();
    for (i, p) in pools.iter().enumerate() {
        let ModelPool::ArimaMaxOrder(k) = p else {
            continue;
        };
        let Some(j) = pools
            .iter()
            .position(|q| *q == ModelPool::ArimaMaxOrder(k.saturating_sub(1)))
        else {
            continue;
        };
        let sel = |outs: &[Outcome]| -> BTreeMap<String, ArimaOrder> {
            outs.iter()
                .filter_map(|o| Some((o.record.series_id.clone(), o.arima_order?)))
                .collect()
        };
        let (a, b) = (sel(&by_pool[i]), sel(&by_pool[j]));
        let common: Vec<(String, ArimaOrder)> = a
            .iter()
            .filter(|(id, _)| b.contains_key(*id))
            .map(|(id, o)| (id.clone(), *o))
            .collect();
        let prev: Vec<(String, ArimaOrder)> =
            common.iter().map(|(id, _)| (id.clone(), b[id])).collect();
        if let Ok(c) = order_change_frequencies(&common, &prev) {
            rows.push(OrderChangeRow {
                pool: p.label(),
                previous: pools[j].label(),
                n_series: common.len(),
                p: c.p,
                q: c.q,
                seasonal_p: c.seasonal_p,
                seasonal_q: c.seasonal_q,
                any: c.any,
            });
        }
    }
    rows
}
