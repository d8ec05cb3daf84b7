use super::poly::difference;
use super::ArimaError;
use crate::stats;

/// 5% critical value of the level-stationarity KPSS test.
pub const KPSS_CRITICAL_5PCT: f64 = 0.463;
/// Seasonal strength at or above which one seasonal difference is taken.
pub const SEASONAL_STRENGTH_THRESHOLD: f64 = 0.64;
/// Largest ordinary differencing order considered.
pub const MAX_D: usize = 2;

/// Default Bartlett window, `floor(4 (n/100)^(1/4))`.
pub fn default_lag_window(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Level-stationarity KPSS statistic with a Bartlett long-run variance.
///
/// A constant series has zero partial sums and zero long-run variance; its
/// statistic is defined as 0.
pub fn kpss_statistic(x: &[f64], lag_window: Option<usize>) -> Result<f64, ArimaError> {
    let n = x.len();
    if n < 8 {
        return Err(ArimaError::SeriesTooShort { n, needed: 8 });
    }
    let lags = lag_window
        .unwrap_or_else(|| default_lag_window(n))
        .min(n - 1);
    let mean = stats::mean(x);
    let e: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let nf = n as f64;
    eta /= nf * nf;
    let mut lrv = e.iter().map(|v| v * v).sum::<f64>() / nf;
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let cov: f64 = e[l..].iter().zip(&e[..n - l]).map(|(a, b)| a * b).sum();
        lrv += 2.0 * w * cov / nf;
    }
    if lrv <= f64::EPSILON * mean.abs().max(1.0).powi(2) {
        return Ok(0.0);
    }
    Ok(eta / lrv)
}

/// Strength of seasonality from a classical additive decomposition,
/// `max(0, 1 - Var(R) / Var(R + S))` over the span where the trend exists.
/// Returns 0 when the series is shorter than two cycles.
pub fn seasonal_strength(x: &[f64], period: usize) -> f64 {
    let Some(dec) = stats::classical_decomposition(x, period, false) else {
        return 0.0;
    };
    let mut rem = Vec::new();
    let mut detrended = Vec::new();
    for (t, (v, tr)) in x.iter().zip(&dec.trend).enumerate() {
        if let Some(tr) = tr {
            let s = dec.figure[t % period];
            rem.push(v - tr - s);
            detrended.push(v - tr);
        }
    }
    let vd = stats::variance(&detrended);
    if vd.is_nan() || vd <= 0.0 {
        return 0.0;
    }
    (1.0 - stats::variance(&rem) / vd).max(0.0)
}

/// Choose `(d, D)`: `D` from the seasonal-strength rule (only when
/// `period > 1`), then `d <= 2` by repeated KPSS tests at the 5% level.
pub fn choose_differencing(train: &[f64], period: usize) -> Result<(usize, usize), ArimaError> {
    let seasonal_d = usize::from(
        period > 1
            && train.len() >= 2 * period + 8
            && seasonal_strength(train, period) >= SEASONAL_STRENGTH_THRESHOLD,
    );
    let mut w = difference(train, 0, seasonal_d, period);
    if w.len() < 3 {
        return Err(ArimaError::SeriesTooShort {
            n: w.len(),
            needed: 3,
        });
    }
    let mut d = 0;
    while d < MAX_D && w.len() >= 8 {
        if kpss_statistic(&w, None)? < KPSS_CRITICAL_5PCT {
            break;
        }
        w = difference(&w, 1, 0, 1);
        d += 1;
    }
    Ok((d, seasonal_d))
}
