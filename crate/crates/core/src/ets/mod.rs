//! Exponential smoothing state-space models: fitting, selection and forecasting.

mod fit;
mod forecast;
pub(crate) mod model;
mod select;
mod spec;

use thiserror::Error;

pub use fit::{ets_fit, ets_fit_with, EtsFit, EtsFitOptions};
pub use forecast::{ets_forecast, DEFAULT_PATHS};
pub use model::{EtsParams, EtsState};
pub use select::{ets_select, CandidateLog, EtsSelection};
pub use spec::{ErrorType, EtsModelSpec, ParseSpecError, SeasonalType, TrendType};

use crate::forecast::ForecastError;

#[derive(Debug, Error, PartialEq)]
pub enum EtsError {
    #[error("{0} is not an applicable model")]
    InapplicableModel(EtsModelSpec),
    #[error("{0} needs strictly positive data")]
    NonPositiveData(EtsModelSpec),
    #[error("constant series cannot be fitted with multiplicative seasonality")]
    DegenerateSeries,
    #[error("optimiser found no feasible parameters for {0}")]
    OptimizationFailed(EtsModelSpec),
    #[error("{n} observations are too few for {k} parameters")]
    InsufficientData { n: usize, k: usize },
    #[error("seasonal model needs a period of at least 2 (got {0})")]
    SeasonalPeriodRequired(usize),
    #[error("training data contain non-finite values")]
    NonFiniteData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("no candidate model could be fitted")]
    AllModelsFailed,
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}
