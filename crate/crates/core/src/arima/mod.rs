//! Seasonal ARIMA models: differencing, exact likelihood fitting, order search
//! and forecasting.

mod fit;
mod forecast;
mod kpss;
pub mod likelihood;
mod order;
pub mod poly;
mod search;

use thiserror::Error;

pub use fit::{arima_fit, ArimaFit, ROOT_MARGIN};
pub use forecast::arima_forecast;
pub use kpss::{
    choose_differencing, default_lag_window, kpss_statistic, seasonal_strength, KPSS_CRITICAL_5PCT,
    MAX_D, SEASONAL_STRENGTH_THRESHOLD,
};
pub use order::{count_order_tuples, order_tuples, ArimaOrder};
pub use search::{
    arima_search_exhaustive, arima_search_stepwise, ArimaCandidate, ArimaSearch, MAX_K,
    STEPWISE_MAX_ORDER, STEPWISE_MAX_P, STEPWISE_MAX_Q, STEPWISE_MAX_SEASONAL,
};

use crate::forecast::ForecastError;

#[derive(Debug, Error, PartialEq)]
pub enum ArimaError {
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("series of length {n} is too short (need {needed})")]
    SeriesTooShort { n: usize, needed: usize },
    #[error("{n} differenced observations are too few for {k} parameters")]
    InsufficientData { n: usize, k: usize },
    #[error("{0} fit is not stationary")]
    NonStationaryFit(ArimaOrder),
    #[error("{0} fit is not invertible")]
    NonInvertibleFit(ArimaOrder),
    #[error("optimiser failed for {0}")]
    OptimizationFailed(ArimaOrder),
    #[error("training data contain non-finite values")]
    NonFiniteData,
    #[error("maximum order must be between 1 and 8 (got {0})")]
    InvalidMaxOrder(usize),
    #[error("no candidate model could be fitted")]
    AllModelsFailed,
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}
