//! Small numerical helpers shared by the model engines.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divisor `n`).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

/// Upper `p` quantile of the standard normal distribution.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Two-sided critical value for a central interval at `level`.
pub fn z_for_level(level: f64) -> f64 {
    normal_quantile(0.5 + level / 2.0)
}

/// Sample quantile by linear interpolation of order statistics (type 7, the R default).
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Ordinary least squares fit of `y` on `1..=n`. Returns (intercept, slope),
/// where the intercept is the fitted value at time 0.
pub fn linear_trend(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    if y.len() < 2 {
        return (y.first().copied().unwrap_or(0.0), 0.0);
    }
    let tbar = (n + 1.0) / 2.0;
    let ybar = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in y.iter().enumerate() {
        let t = (i + 1) as f64 - tbar;
        sxy += t * (v - ybar);
        sxx += t * t;
    }
    let slope = sxy / sxx;
    (ybar - slope * tbar, slope)
}

/// Centred moving average of order `m` (a 2x`m` average when `m` is even).
/// Entries without a full window are `None`.
pub fn centred_moving_average(y: &[f64], m: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let mut out = vec![None; n];
    if m < 2 {
        return y.iter().copied().map(Some).collect();
    }
    let half = m / 2;
    if m % 2 == 1 {
        for t in half..n.saturating_sub(half) {
            out[t] = Some(y[t - half..=t + half].iter().sum::<f64>() / m as f64);
        }
    } else {
        for t in half..n.saturating_sub(half) {
            let mut acc = 0.5 * (y[t - half] + y[t + half]);
            acc += y[t - half + 1..t + half].iter().sum::<f64>();
            out[t] = Some(acc / m as f64);
        }
    }
    out
}

/// Classical decomposition components.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub trend: Vec<Option<f64>>,
    /// Seasonal figure by phase (`t % m`), additive figures sum to zero and
    /// multiplicative ones average one.
    pub figure: Vec<f64>,
}

/// Additive or multiplicative classical decomposition with period `m`.
/// Needs at least `2m` observations.
pub fn classical_decomposition(y: &[f64], m: usize, multiplicative: bool) -> Option<Decomposition> {
    if m < 2 || y.len() < 2 * m {
        return None;
    }
    let trend = centred_moving_average(y, m);
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for (t, (v, tr)) in y.iter().zip(&trend).enumerate() {
        if let Some(tr) = tr {
            let d = if multiplicative { v / tr } else { v - tr };
            if d.is_finite() {
                sums[t % m] += d;
                counts[t % m] += 1;
            }
        }
    }
    if counts.contains(&0) {
        return None;
    }
    let mut figure: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| s / *c as f64)
        .collect();
    let centre = mean(&figure);
    if multiplicative {
        figure.iter_mut().for_each(|f| *f /= centre);
    } else {
        figure.iter_mut().for_each(|f| *f -= centre);
    }
    Some(Decomposition { trend, figure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&x, 0.0), 1.0);
        assert_eq!(quantile_sorted(&x, 1.0), 5.0);
        assert_eq!(quantile_sorted(&x, 0.5), 3.0);
        assert!((quantile_sorted(&x, 0.1) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn normal_critical_value() {
        assert!((z_for_level(0.95) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn trend_of_a_line() {
        let y: Vec<f64> = (1..=10).map(|t| 3.0 + 2.0 * t as f64).collect();
        let (a, b) = linear_trend(&y);
        assert!((a - 3.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn even_window_average() {
        let y: Vec<f64> = (0..12).map(f64::from).collect();
        let ma = centred_moving_average(&y, 4);
        assert_eq!(ma[0], None);
        assert_eq!(ma[2], Some(2.0));
        assert_eq!(ma[9], Some(9.0));
        assert_eq!(ma[10], None);
    }

    #[test]
    fn decomposition_recovers_pattern() {
        let pattern = [3.0, -1.0, -4.0, 2.0];
        let y: Vec<f64> = (0..16).map(|t| 0.5 * t as f64 + pattern[t % 4]).collect();
        let d = classical_decomposition(&y, 4, false).unwrap();
        for (f, p) in d.figure.iter().zip(pattern) {
            assert!((f - p).abs() < 1e-12);
        }
    }
}
