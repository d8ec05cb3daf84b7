//! State recursions shared by fitting, forecasting and simulation.
//!
//! The level/trend/seasonal updates are written in terms of the observation,
//! so the same update serves additive and multiplicative errors:
//!
//! ```text
//! q  = l + phi*b | l * b^phi           (level + trend contribution)
//! mu = q | q + s | q * s               (one-step forecast)
//! l' = q + alpha * (y (-|/) s - q)
//! b' = phib + (beta/alpha) * ((l' -|/ l) - phib)
//! s' = s + gamma * (y (-|/) q - s)
//! ```

use serde::{Deserialize, Serialize};

use super::spec::{ErrorType, EtsModelSpec, SeasonalType, TrendType};
use crate::stats;

/// Smoothing and damping parameters. Absent components are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtsParams {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
}

/// Level, trend and seasonal states.
///
/// For an initial state `season[j]` is the index applied to observations with
/// `t % m == j`. For the state at the forecast origin `season[j]` is the index
/// applied `j + 1` steps ahead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsState {
    pub level: f64,
    pub trend: Option<f64>,
    pub season: Vec<f64>,
}

/// Parameters flattened for the inner loops; absent components are neutral.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coefs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl Coefs {
    pub fn from_params(p: &EtsParams) -> Coefs {
        Coefs {
            alpha: p.alpha,
            beta: p.beta.unwrap_or(0.0),
            gamma: p.gamma.unwrap_or(0.0),
            phi: p.phi.unwrap_or(1.0),
        }
    }
}

/// Result of one state update.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub mu: f64,
    pub level: f64,
    pub trend: f64,
    pub season: f64,
}

/// Level plus trend contribution one step ahead, `q`, and the trend term `phib`.
#[inline]
fn level_trend(trend: TrendType, c: &Coefs, l: f64, b: f64) -> (f64, f64) {
    match trend {
        TrendType::None => (l, 0.0),
        TrendType::Additive | TrendType::AdditiveDamped => {
            let phib = c.phi * b;
            (l + phib, phib)
        }
        TrendType::Multiplicative | TrendType::MultiplicativeDamped => {
            let phib = if c.phi == 1.0 { b } else { b.powf(c.phi) };
            (l * phib, phib)
        }
    }
}

/// One-step forecast from the current state.
#[inline]
pub(crate) fn one_step(spec: &EtsModelSpec, c: &Coefs, l: f64, b: f64, s: f64) -> f64 {
    let (q, _) = level_trend(spec.trend, c, l, b);
    match spec.seasonal {
        SeasonalType::None => q,
        SeasonalType::Additive => q + s,
        SeasonalType::Multiplicative => q * s,
    }
}

/// Advance the state with observation `y`.
#[inline]
pub(crate) fn update(spec: &EtsModelSpec, c: &Coefs, l: f64, b: f64, s: f64, y: f64) -> Step {
    let (q, phib) = level_trend(spec.trend, c, l, b);
    let (mu, deseason) = match spec.seasonal {
        SeasonalType::None => (q, y),
        SeasonalType::Additive => (q + s, y - s),
        SeasonalType::Multiplicative => (q * s, y / s),
    };
    let level = q + c.alpha * (deseason - q);
    let trend = match spec.trend {
        TrendType::None => 0.0,
        TrendType::Additive | TrendType::AdditiveDamped => {
            phib + (c.beta / c.alpha) * ((level - l) - phib)
        }
        TrendType::Multiplicative | TrendType::MultiplicativeDamped => {
            phib + (c.beta / c.alpha) * (level / l - phib)
        }
    };
    let season = match spec.seasonal {
        SeasonalType::None => 0.0,
        SeasonalType::Additive => s + c.gamma * ((y - q) - s),
        SeasonalType::Multiplicative => s + c.gamma * (y / q - s),
    };
    Step {
        mu,
        level,
        trend,
        season,
    }
}

/// Whether a state keeps multiplicative components in their valid range.
#[inline]
fn state_ok(spec: &EtsModelSpec, l: f64, b: f64, s: f64) -> bool {
    if spec.trend.is_multiplicative() && (l <= 0.0 || b <= 0.0) {
        return false;
    }
    if spec.seasonal == SeasonalType::Multiplicative && s <= 0.0 {
        return false;
    }
    true
}

/// Summary of a pass of the recursion over the data.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PassStats {
    pub sse: f64,
    /// Sum of `ln |mu_t|` (only accumulated for multiplicative errors).
    pub sum_log_mu: f64,
}

/// Run the recursion over `y` from `init`. `season` is scratch space of length
/// `m` (or 0 without seasonality) and holds the phase-indexed seasonal states
/// at the end. Returns `None` when a state leaves its valid range.
pub(crate) fn pass(
    spec: &EtsModelSpec,
    c: &Coefs,
    y: &[f64],
    init_level: f64,
    init_trend: f64,
    season: &mut [f64],
    mut trace: Option<&mut Vec<(f64, f64)>>,
) -> Option<(PassStats, f64, f64)> {
    let m = season.len().max(1);
    let seasonal = !season.is_empty();
    let mult_error = spec.error == ErrorType::Multiplicative;
    let mut l = init_level;
    let mut b = init_trend;
    let mut sse = 0.0;
    let mut sum_log_mu = 0.0;
    for (t, &obs) in y.iter().enumerate() {
        let phase = t % m;
        let s = if seasonal { season[phase] } else { 0.0 };
        if !state_ok(spec, l, b, s) {
            return None;
        }
        let step = update(spec, c, l, b, s, obs);
        if !step.mu.is_finite() {
            return None;
        }
        let e = if mult_error {
            if step.mu <= 0.0 {
                return None;
            }
            sum_log_mu += step.mu.ln();
            (obs - step.mu) / step.mu
        } else {
            obs - step.mu
        };
        sse += e * e;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((step.mu, e));
        }
        l = step.level;
        b = step.trend;
        if seasonal {
            season[phase] = step.season;
        }
    }
    if !(sse.is_finite() && l.is_finite() && b.is_finite()) {
        return None;
    }
    Some((PassStats { sse, sum_log_mu }, l, b))
}

/// Heuristic starting states.
///
/// Seasonal indices come from a classical decomposition of the first three
/// cycles (or of all data when shorter). Level and trend come from the mean
/// or a least-squares line over the first `max(10, 2m)` seasonally adjusted
/// observations.
pub(crate) fn heuristic_state(spec: &EtsModelSpec, y: &[f64], m: usize) -> EtsState {
    let n = y.len();
    let mut season = Vec::new();
    let mut adjusted = y.to_vec();
    if spec.is_seasonal() {
        let mult = spec.seasonal == SeasonalType::Multiplicative;
        let span = n.min(3 * m);
        let figure = stats::classical_decomposition(&y[..span], m, mult)
            .map(|d| d.figure)
            .unwrap_or_else(|| vec![if mult { 1.0 } else { 0.0 }; m]);
        season = figure;
        if mult {
            season.iter_mut().for_each(|s| *s = s.max(1e-2));
            let avg = stats::mean(&season);
            season.iter_mut().for_each(|s| *s /= avg);
            for (t, v) in adjusted.iter_mut().enumerate() {
                *v /= season[t % m];
            }
        } else {
            for (t, v) in adjusted.iter_mut().enumerate() {
                *v -= season[t % m];
            }
        }
    }
    let maxn = n.min(10.max(2 * m));
    let head = &adjusted[..maxn];
    let (level, trend) = match spec.trend {
        TrendType::None => (stats::mean(head), None),
        TrendType::Additive | TrendType::AdditiveDamped => {
            let (mut a, mut b) = stats::linear_trend(head);
            if (a + b).abs() < 1e-8 {
                a *= 1.0 + 1e-3;
                b *= 1.0 - 1e-3;
            }
            (a, Some(b))
        }
        TrendType::Multiplicative | TrendType::MultiplicativeDamped => {
            let (a, slope) = stats::linear_trend(head);
            let mut first = a + slope;
            if first.abs() < 1e-8 {
                first = 1e-7;
            }
            let mut b = (a + 2.0 * slope) / first;
            if b.abs() > 1e10 {
                b = b.signum() * 1e10;
            }
            let mut l = first / b;
            if l < 1e-8 || b < 1e-8 {
                l = head[0].max(1e-3);
                b = (head.get(1).copied().unwrap_or(head[0]) / head[0]).max(1e-3);
            }
            (l, Some(b))
        }
    };
    EtsState {
        level,
        trend,
        season,
    }
}

/// Rotate phase-indexed seasonal states so index 0 is the next step ahead.
pub(crate) fn rotate_ahead(season: &[f64], n: usize) -> Vec<f64> {
    let m = season.len();
    (0..m).map(|i| season[(n + i) % m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> EtsModelSpec {
        s.parse().unwrap()
    }

    #[test]
    fn additive_updates_match_error_correction_form() {
        let c = Coefs {
            alpha: 0.3,
            beta: 0.1,
            gamma: 0.2,
            phi: 0.9,
        };
        let (l, b, s, y) = (10.0, 0.5, 1.5, 13.0);
        let st = update(&spec("AAdA"), &c, l, b, s, y);
        let e = y - (l + 0.9 * b + s);
        assert!((st.mu - (l + 0.9 * b + s)).abs() < 1e-12);
        assert!((st.level - (l + 0.9 * b + 0.3 * e)).abs() < 1e-12);
        assert!((st.trend - (0.9 * b + 0.1 * e)).abs() < 1e-12);
        assert!((st.season - (s + 0.2 * e)).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_updates_match_error_correction_form() {
        let c = Coefs {
            alpha: 0.3,
            beta: 0.1,
            gamma: 0.2,
            phi: 0.95,
        };
        let (l, b, s, y) = (10.0, 1.02, 1.1, 12.0);
        let st = update(&spec("MMdM"), &c, l, b, s, y);
        let q = l * b.powf(0.95);
        let eps = (y - q * s) / (q * s);
        assert!((st.level - q * (1.0 + 0.3 * eps)).abs() < 1e-12);
        assert!((st.trend - b.powf(0.95) * (1.0 + 0.1 * eps)).abs() < 1e-12);
        assert!((st.season - s * (1.0 + 0.2 * eps)).abs() < 1e-12);
    }

    #[test]
    fn heuristic_seasonal_state_is_normalised() {
        let y: Vec<f64> = (0..24)
            .map(|t| (20.0 + t as f64) * [1.2, 0.8, 1.1, 0.9][t % 4])
            .collect();
        let st = heuristic_state(&spec("MAdM"), &y, 4);
        assert_eq!(st.season.len(), 4);
        assert!((stats::mean(&st.season) - 1.0).abs() < 1e-12);
        assert!(st.season.iter().all(|s| *s > 0.0));
        let st = heuristic_state(&spec("AAdA"), &y, 4);
        assert!(st.season.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn rotation() {
        assert_eq!(
            rotate_ahead(&[0.0, 1.0, 2.0, 3.0], 6),
            vec![2.0, 3.0, 0.0, 1.0]
        );
    }
}
