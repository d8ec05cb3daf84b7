//! Accuracy, interval quality, calibration, significance testing and
//! cost accounting.

mod dm;
mod frequencies;
mod metrics;
mod value;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dm::{dm_test_modified, hln_factor, DmResult, Loss};
pub use frequencies::{order_change_frequencies, profile_frequencies, OrderChanges};
pub use metrics::{
    calibration, coverage, interval_score_w, mase, msis, msis_with, seasonal_naive_scale,
    Calibration, MsisForm,
};
pub use value::{ccr, fva, monetize, CPU_HOUR_RATE};

/// Errors raised by the evaluation layer.
#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("seasonal-naive scale is zero")]
    ZeroDenominator,
    #[error("training series of length {n} is too short for period {period}")]
    TrainTooShort { n: usize, period: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("{0} error pairs are too few for horizon {1}")]
    TooFewErrors(usize, usize),
    #[error("loss differentials have zero variance")]
    DegenerateVariance,
    #[error("series ids do not match between selections: {0}")]
    IdMismatch(String),
    #[error("no records")]
    Empty,
}

/// Key used for level-indexed maps, the shortest decimal form of the level
/// (`0.95`, `0.8`).
pub fn level_key(level: f64) -> String {
    format!("{level}")
}

/// Per-series, per-pool evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub series_id: String,
    pub pool_label: String,
    pub selected_model: String,
    /// Criterion value of the selected model on the training data.
    pub criterion: f64,
    pub mase: f64,
    pub msis: BTreeMap<String, f64>,
    pub covered: BTreeMap<String, Vec<bool>>,
    pub cost_seconds: f64,
    /// Absolute forecast errors per horizon step.
    pub abs_errors: Vec<f64>,
    /// Forecasts exceed ten times the largest absolute training value.
    pub explosive: bool,
}
