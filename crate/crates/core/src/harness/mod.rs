//! Benchmark orchestration: pool-versus-pool runs, balanced-pool
//! enumeration and forecast-value-added tables.

mod bench;
mod enumerate;
mod fva;
mod render;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{
    run_benchmark, run_benchmark_with, series_seed, BenchReport, Bounds, ConfigEcho, DatasetInfo,
    DmCell, DmOutcome, Environment, ExplosiveEntry, ExplosiveSummary, ForecastEntry,
    OrderChangeRow, PoolSummary, ProgressEvent, Skip, EXPLOSIVE_FACTOR, REPORT_SCHEMA_VERSION,
};
pub use enumerate::{
    run_pool_enumeration, EnumerationReport, FiveNumber, NamedPoolRank, PoolScore, SizeDistribution,
};
pub use fva::{fva_table, report_fva, FvaRow, FvaTable, PoolScoreRow};
pub use render::format_sig;

use crate::evaluation::MsisForm;
use crate::forecast::DEFAULT_LEVELS;
use crate::pools::{Criterion, ModelPool};
use crate::series::DataError;

/// Errors raised by the harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("reports cannot be compared: {0}")]
    DatasetMismatch(String),
    #[error("cannot read report {path}: {reason}")]
    Report { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parameters of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(with = "pool_labels")]
    pub pools: Vec<ModelPool>,
    pub criterion: Criterion,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    /// Sample paths for simulated intervals.
    pub paths: usize,
    pub msis_form: MsisForm,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pools: vec![ModelPool::Ets(crate::pools::EtsPoolName::Reduced)],
            criterion: Criterion::default(),
            levels: DEFAULT_LEVELS.to_vec(),
            seed: 42,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            paths: crate::ets::DEFAULT_PATHS,
            msis_form: MsisForm::Mean,
        }
    }
}

impl ExperimentConfig {
    /// Check the configuration and return it with normalised levels.
    pub fn validated(&self) -> Result<ExperimentConfig, HarnessError> {
        if self.pools.is_empty() {
            return Err(HarnessError::Config("at least one pool is required".into()));
        }
        let mut labels: Vec<String> = self.pools.iter().map(|p| p.label()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::Config("duplicate pool label".into()));
        }
        let levels = crate::forecast::normalize_levels(&self.levels)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if levels.is_empty() {
            return Err(HarnessError::Config(
                "at least one level is required".into(),
            ));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be positive".into()));
        }
        if self.paths == 0 {
            return Err(HarnessError::Config("paths must be positive".into()));
        }
        Ok(ExperimentConfig {
            levels,
            ..self.clone()
        })
    }
}

mod pool_labels {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::pools::ModelPool;

    pub fn serialize<S: Serializer>(pools: &[ModelPool], s: S) -> Result<S::Ok, S::Error> {
        let labels: Vec<String> = pools.iter().map(|p| p.label()).collect();
        labels.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ModelPool>, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        labels
            .iter()
            .map(|l| l.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
