use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EvalError;

/// Loss applied to forecast errors before differencing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    Absolute,
    Squared,
}

impl Loss {
    fn apply(self, e: f64) -> f64 {
        match self {
            Loss::Absolute => e.abs(),
            Loss::Squared => e * e,
        }
    }
}

/// Modified Diebold-Mariano statistic and two-sided p-value. A positive
/// statistic means the first error sequence has larger losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Small-sample multiplier `sqrt((m + 1 - 2h + h(h-1)/m) / m)`.
pub fn hln_factor(m: usize, h: usize) -> f64 {
    let (m, h) = (m as f64, h as f64);
    ((m + 1.0 - 2.0 * h + h * (h - 1.0) / m) / m).sqrt()
}

/// Modified Diebold-Mariano test of equal predictive accuracy.
///
/// The long-run variance of the loss differential uses autocovariances up to
/// lag `h - 1`; the corrected statistic is referred to a t distribution with
/// `m - 1` degrees of freedom.
pub fn dm_test_modified(
    errors_a: &[f64],
    errors_b: &[f64],
    h: usize,
    loss: Loss,
) -> Result<DmResult, EvalError> {
    let m = errors_a.len();
    if errors_b.len() != m {
        return Err(EvalError::LengthMismatch {
            expected: m,
            got: errors_b.len(),
        });
    }
    let h = h.max(1);
    if m < 4.max(h + 1) {
        return Err(EvalError::TooFewErrors(m, h));
    }
    let d: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .map(|(a, b)| loss.apply(*a) - loss.apply(*b))
        .collect();
    let mf = m as f64;
    let mean = d.iter().sum::<f64>() / mf;
    let autocov = |k: usize| -> f64 {
        d[k..]
            .iter()
            .zip(&d)
            .map(|(x, y)| (x - mean) * (y - mean))
            .sum::<f64>()
            / mf
    };
    let mut lrv = autocov(0);
    for k in 1..h {
        lrv += 2.0 * autocov(k);
    }
    let var = lrv / mf;
    let scale = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if var.is_nan() || var <= (f64::EPSILON * scale).powi(2) {
        return Err(EvalError::DegenerateVariance);
    }
    let statistic = mean / var.sqrt() * hln_factor(m, h);
    let t = StudentsT::new(0.0, 1.0, mf - 1.0).expect("m >= 4 gives valid degrees of freedom");
    let p_value = (2.0 * (1.0 - t.cdf(statistic.abs()))).clamp(0.0, 1.0);
    Ok(DmResult { statistic, p_value })
}
