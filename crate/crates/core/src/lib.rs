//! Exponential smoothing and ARIMA forecasting with reduced model pools,
//! information-criterion selection and accuracy/cost evaluation.

pub mod arima;
pub mod ets;
pub mod evaluation;
pub mod forecast;
pub mod harness;
pub mod optim;
pub mod pools;
pub mod series;
pub mod stats;

pub use arima::{ArimaFit, ArimaOrder};
pub use ets::{EtsFit, EtsModelSpec};
pub use evaluation::EvaluationRecord;
pub use forecast::{Forecast, Interval};
pub use harness::{BenchReport, ExperimentConfig};
pub use pools::{Criterion, CriterionKind, ModelPool};
pub use series::{load_dataset, split_fixed_origin, DataFormat, Dataset, SplitSeries, TimeSeries};
