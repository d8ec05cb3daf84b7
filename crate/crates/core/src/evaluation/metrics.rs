use serde::{Deserialize, Serialize};

use super::EvalError;

/// How interval scores are combined across the horizon in MSIS.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MsisForm {
    /// Average over the horizon.
    #[default]
    Mean,
    /// Sum over the horizon.
    Sum,
}

impl std::str::FromStr for MsisForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(MsisForm::Mean),
            "sum" => Ok(MsisForm::Sum),
            _ => Err(format!("unknown MSIS form '{s}' (expected mean or sum)")),
        }
    }
}

/// In-sample mean absolute error of the seasonal naive forecast,
/// `1/(n-s) sum_{i>s} |y_i - y_{i-s}|`.
pub fn seasonal_naive_scale(train: &[f64], period: usize) -> Result<f64, EvalError> {
    let s = period.max(1);
    let n = train.len();
    if n <= s {
        return Err(EvalError::TrainTooShort { n, period: s });
    }
    let total: f64 = train[s..]
        .iter()
        .zip(train)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let scale = total / (n - s) as f64;
    if scale > 0.0 && scale.is_finite() {
        Ok(scale)
    } else {
        Err(EvalError::ZeroDenominator)
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), EvalError> {
    if expected == got {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch { expected, got })
    }
}

/// Mean absolute scaled error of `point` against `test`.
pub fn mase(train: &[f64], test: &[f64], point: &[f64], period: usize) -> Result<f64, EvalError> {
    check_len(test.len(), point.len())?;
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let scale = seasonal_naive_scale(train, period)?;
    let mae = test
        .iter()
        .zip(point)
        .map(|(y, f)| (y - f).abs())
        .sum::<f64>()
        / test.len() as f64;
    Ok(mae / scale)
}

/// Interval score: width plus `2/alpha` times the distance by which `y`
/// falls outside `[l, u]`.
pub fn interval_score_w(l: f64, u: f64, y: f64, alpha: f64) -> f64 {
    let mut w = u - l;
    if y < l {
        w += 2.0 / alpha * (l - y);
    }
    if y > u {
        w += 2.0 / alpha * (y - u);
    }
    w
}

/// Mean scaled interval score with horizon averaging.
pub fn msis(
    train: &[f64],
    test: &[f64],
    lower: &[f64],
    upper: &[f64],
    alpha: f64,
    period: usize,
) -> Result<f64, EvalError> {
    msis_with(train, test, lower, upper, alpha, period, MsisForm::Mean)
}

/// Scaled interval score with a choice of horizon aggregation.
pub fn msis_with(
    train: &[f64],
    test: &[f64],
    lower: &[f64],
    upper: &[f64],
    alpha: f64,
    period: usize,
    form: MsisForm,
) -> Result<f64, EvalError> {
    check_len(test.len(), lower.len())?;
    check_len(test.len(), upper.len())?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::InvalidAlpha(alpha));
    }
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let scale = seasonal_naive_scale(train, period)?;
    let total: f64 = test
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(y, (l, u))| interval_score_w(*l, *u, *y, alpha))
        .sum();
    let agg = match form {
        MsisForm::Mean => total / test.len() as f64,
        MsisForm::Sum => total,
    };
    Ok(agg / scale)
}

/// Whether each actual lies inside its interval (bounds inclusive).
pub fn coverage(test: &[f64], lower: &[f64], upper: &[f64]) -> Vec<bool> {
    test.iter()
        .zip(lower.iter().zip(upper))
        .map(|(y, (l, u))| l <= y && y <= u)
        .collect()
}

/// Empirical coverage per horizon step and overall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub per_step: Vec<f64>,
    pub overall: f64,
}

/// Coverage fractions from per-record covered flags. Records may have
/// different horizons; step `i` averages over the records that reach it.
pub fn calibration<S: AsRef<[bool]>>(covered: &[S]) -> Result<Calibration, EvalError> {
    let h = covered.iter().map(|c| c.as_ref().len()).max().unwrap_or(0);
    if h == 0 {
        return Err(EvalError::Empty);
    }
    let mut hits = vec![0usize; h];
    let mut counts = vec![0usize; h];
    for c in covered {
        for (i, &b) in c.as_ref().iter().enumerate() {
            counts[i] += 1;
            hits[i] += usize::from(b);
        }
    }
    let per_step = hits
        .iter()
        .zip(&counts)
        .map(|(&a, &n)| a as f64 / n as f64)
        .collect();
    let overall = hits.iter().sum::<usize>() as f64 / counts.iter().sum::<usize>() as f64;
    Ok(Calibration { per_step, overall })
}
