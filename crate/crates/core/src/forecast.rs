//! Forecast container shared by the ETS and ARIMA engines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default confidence levels used for calibration analysis.
pub const DEFAULT_LEVELS: [f64; 5] = [0.80, 0.85, 0.90, 0.95, 0.99];

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("forecast horizon must be at least 1")]
    ZeroHorizon,
    #[error("confidence level {0} is outside (0, 1)")]
    InvalidLevel(f64),
}

/// How the prediction intervals were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    Analytic,
    Simulated,
}

/// Central prediction interval at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub level: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Point forecasts and prediction intervals for steps `1..=h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub point: Vec<f64>,
    /// Sorted by ascending level.
    pub intervals: Vec<Interval>,
    /// Descriptor of the producing model, e.g. `MAdM` or `ARIMA(1,1,0)`.
    pub source: String,
    pub method: IntervalMethod,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.point.len()
    }

    pub fn interval(&self, level: f64) -> Option<&Interval> {
        self.intervals
            .iter()
            .find(|iv| (iv.level - level).abs() < 1e-9)
    }

    /// Multiply every number by `c`.
    pub fn scaled(&self, c: f64) -> Forecast {
        Forecast {
            point: self.point.iter().map(|v| v * c).collect(),
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval {
                    level: iv.level,
                    lower: iv.lower.iter().map(|v| v * c).collect(),
                    upper: iv.upper.iter().map(|v| v * c).collect(),
                })
                .collect(),
            source: self.source.clone(),
            method: self.method,
        }
    }
}

/// Sort, deduplicate and range-check confidence levels.
pub fn normalize_levels(levels: &[f64]) -> Result<Vec<f64>, ForecastError> {
    let mut out = Vec::with_capacity(levels.len());
    for &l in levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(ForecastError::InvalidLevel(l));
        }
        out.push(l);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(out)
}
