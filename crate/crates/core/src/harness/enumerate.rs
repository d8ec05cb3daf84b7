use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bench::series_seed;
use super::{ExperimentConfig, HarnessError};
use crate::ets::{ets_fit, ets_forecast, EtsModelSpec};
use crate::evaluation::{mase, msis_with};
use crate::pools::{enumerate_balanced_pools, ets_pool, EtsPoolName};
use crate::series::Dataset;

/// Level used for the MSIS column of the enumeration.
const ENUMERATION_LEVEL: f64 = 0.95;

/// Aggregate scores of one balanced pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolScore {
    pub mask: u32,
    pub size: usize,
    pub members: Vec<String>,
    /// Series with at least one successful member.
    pub n_series: usize,
    pub mase_mean: f64,
    pub msis_mean: f64,
    pub cost_mean_seconds: f64,
    /// 1-based rank by mean MASE (ties broken by mask).
    pub rank: usize,
}

/// Minimum, quartiles and maximum (type-7 quantiles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    fn of(values: &mut [f64]) -> FiveNumber {
        values.sort_by(f64::total_cmp);
        let q = |p: f64| crate::stats::quantile_sorted(values, p);
        FiveNumber {
            min: values[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: values[values.len() - 1],
        }
    }
}

/// Distribution of pool scores for one pool size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeDistribution {
    pub size: usize,
    pub n_pools: usize,
    pub mase: FiveNumber,
    pub msis: FiveNumber,
    pub cost_seconds: FiveNumber,
}

/// Position of a named pool among all balanced pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPoolRank {
    pub name: String,
    pub mask: u32,
    pub size: usize,
    pub rank: usize,
    pub mase_mean: f64,
    pub msis_mean: f64,
    pub cost_mean_seconds: f64,
}

/// Outcome of scoring every balanced pool on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub seasonal: bool,
    pub models: Vec<String>,
    pub n_pools: usize,
    pub n_series: usize,
    /// Number of model fits performed.
    pub fit_count: usize,
    pub msis_level: f64,
    pub size_distributions: Vec<SizeDistribution>,
    pub named: Vec<NamedPoolRank>,
    /// The ten pools with the lowest mean MASE.
    pub best: Vec<PoolScore>,
    /// Every pool in mask order; large for seasonal runs, so kept out of
    /// the JSON form.
    #[serde(skip)]
    pub pools: Vec<PoolScore>,
}

impl EnumerationReport {
    /// All pools as CSV, one row per pool in mask order.
    pub fn pools_csv(&self) -> String {
        let mut out =
            String::from("mask,size,members,n_series,mase_mean,msis_mean,cost_mean_seconds,rank\n");
        for p in &self.pools {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                p.mask,
                p.size,
                p.members.join(" "),
                p.n_series,
                super::format_sig(p.mase_mean, 6),
                super::format_sig(p.msis_mean, 6),
                super::format_sig(p.cost_mean_seconds, 6),
                p.rank
            ));
        }
        out
    }
}

/// Cached outcome of one model on one series.
#[derive(Clone, Copy)]
struct Cached {
    criterion: Option<f64>,
    mase: f64,
    msis: f64,
    fit_seconds: f64,
    forecast_seconds: f64,
}

struct SeriesCache {
    models: Vec<Cached>,
    /// Indices of successful models by increasing criterion.
    order: Vec<usize>,
}

fn cache_series(
    series: &crate::series::TimeSeries,
    models: &[EtsModelSpec],
    config: &ExperimentConfig,
    fits: &AtomicUsize,
) -> SeriesCache {
    let split = series.split();
    let (train, test) = (split.train(), split.test());
    let period = series.period();
    let seed = series_seed(config.seed, series.id());
    let failed = |fit_seconds| Cached {
        criterion: None,
        mase: 0.0,
        msis: 0.0,
        fit_seconds,
        forecast_seconds: 0.0,
    };
    let cached: Vec<Cached> = models
        .iter()
        .map(|&spec| {
            let started = Instant::now();
            fits.fetch_add(1, Ordering::Relaxed);
            let fit = ets_fit(train, period, spec);
            let fit_seconds = started.elapsed().as_secs_f64();
            let Ok(fit) = fit else {
                return failed(fit_seconds);
            };
            let Ok(criterion) = config.criterion.value(fit.log_lik, fit.k, fit.n) else {
                return failed(fit_seconds);
            };
            let started = Instant::now();
            let fc = ets_forecast(
                &fit,
                split.horizon(),
                &[ENUMERATION_LEVEL],
                config.paths,
                seed,
            );
            let forecast_seconds = started.elapsed().as_secs_f64();
            let scored = fc.ok().and_then(|fc| {
                let iv = &fc.intervals[0];
                let m = mase(train, test, &fc.point, period).ok()?;
                let s = msis_with(
                    train,
                    test,
                    &iv.lower,
                    &iv.upper,
                    1.0 - ENUMERATION_LEVEL,
                    period,
                    config.msis_form,
                )
                .ok()?;
                (m.is_finite() && s.is_finite()).then_some((m, s))
            });
            match scored {
                Some((mase, msis)) => Cached {
                    criterion: Some(criterion),
                    mase,
                    msis,
                    fit_seconds,
                    forecast_seconds,
                },
                None => failed(fit_seconds),
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..cached.len())
        .filter(|&i| cached[i].criterion.is_some())
        .collect();
    order.sort_by(|&a, &b| {
        cached[a]
            .criterion
            .unwrap()
            .total_cmp(&cached[b].criterion.unwrap())
            .then(a.cmp(&b))
    });
    SeriesCache {
        models: cached,
        order,
    }
}

/// Fit every model of the balanced-pool universe once per series, then score
/// every balanced pool by selecting from the cached candidates.
///
/// A pool's cost on a series is the fitting time of all its members plus the
/// forecasting time of the member it selects, averaged over every series.
pub fn run_pool_enumeration(
    config: &ExperimentConfig,
    dataset: &Dataset,
    seasonal: bool,
) -> Result<EnumerationReport, HarnessError> {
    let config = config.validated()?;
    let pools = enumerate_balanced_pools(&EtsModelSpec::applicable(), seasonal)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let models = pools.models().to_vec();
    let masks: Vec<u32> = pools.clone().collect();
    let workers = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let fits = AtomicUsize::new(0);

    let caches: Vec<SeriesCache> = workers.install(|| {
        dataset
            .series()
            .par_iter()
            .map(|s| cache_series(s, &models, &config, &fits))
            .collect()
    });

    let fit_totals: Vec<f64> = (0..models.len())
        .map(|i| caches.iter().map(|c| c.models[i].fit_seconds).sum())
        .collect();
    let n_total = caches.len().max(1) as f64;

    let mut scores: Vec<PoolScore> = workers.install(|| {
        masks
            .par_iter()
            .map(|&mask| {
                let (mut n, mut sm, mut ss) = (0usize, 0.0, 0.0);
                let mut sc: f64 = (0..models.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| fit_totals[i])
                    .sum();
                for cache in &caches {
                    let Some(&sel) = cache.order.iter().find(|&&i| mask & (1 << i) != 0) else {
                        continue;
                    };
                    let c = &cache.models[sel];
                    n += 1;
                    sm += c.mase;
                    ss += c.msis;
                    sc += c.forecast_seconds;
                }
                let nf = n.max(1) as f64;
                PoolScore {
                    mask,
                    size: mask.count_ones() as usize,
                    members: pools.members(mask).iter().map(|s| s.to_string()).collect(),
                    n_series: n,
                    mase_mean: if n > 0 { sm / nf } else { f64::INFINITY },
                    msis_mean: if n > 0 { ss / nf } else { f64::INFINITY },
                    cost_mean_seconds: sc / n_total,
                    rank: 0,
                }
            })
            .collect()
    });

    let mut by_rank: Vec<usize> = (0..scores.len()).collect();
    by_rank.sort_by(|&a, &b| {
        scores[a]
            .mase_mean
            .total_cmp(&scores[b].mase_mean)
            .then(scores[a].mask.cmp(&scores[b].mask))
    });
    for (r, &i) in by_rank.iter().enumerate() {
        scores[i].rank = r + 1;
    }

    let mut groups: BTreeMap<usize, Vec<&PoolScore>> = BTreeMap::new();
    for s in &scores {
        groups.entry(s.size).or_default().push(s);
    }
    let size_distributions = groups
        .into_iter()
        .map(|(size, v)| {
            let mut m: Vec<f64> = v.iter().map(|s| s.mase_mean).collect();
            let mut i: Vec<f64> = v.iter().map(|s| s.msis_mean).collect();
            let mut c: Vec<f64> = v.iter().map(|s| s.cost_mean_seconds).collect();
            SizeDistribution {
                size,
                n_pools: v.len(),
                mase: FiveNumber::of(&mut m),
                msis: FiveNumber::of(&mut i),
                cost_seconds: FiveNumber::of(&mut c),
            }
        })
        .collect();

    let index_of: BTreeMap<u32, usize> = scores
        .iter()
        .enumerate()
        .map(|(i, s)| (s.mask, i))
        .collect();
    let named = EtsPoolName::ALL
        .iter()
        .filter_map(|&name| {
            let mask = pools.mask_of(&ets_pool(name, seasonal))?;
            let s = &scores[*index_of.get(&mask)?];
            Some(NamedPoolRank {
                name: name.label().to_string(),
                mask,
                size: s.size,
                rank: s.rank,
                mase_mean: s.mase_mean,
                msis_mean: s.msis_mean,
                cost_mean_seconds: s.cost_mean_seconds,
            })
        })
        .collect();
    let best = by_rank
        .iter()
        .take(10)
        .map(|&i| scores[i].clone())
        .collect();

    Ok(EnumerationReport {
        seasonal,
        models: models.iter().map(|s| s.to_string()).collect(),
        n_pools: scores.len(),
        n_series: dataset.len(),
        fit_count: fits.into_inner(),
        msis_level: ENUMERATION_LEVEL,
        size_distributions,
        named,
        best,
        pools: scores,
    })
}
