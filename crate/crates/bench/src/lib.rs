//! Deterministic fixtures shared by the benchmarks.

/// Bounded pseudo-noise in [-8, 8] so differenced fixtures are not degenerate.
fn irregular(t: usize) -> f64 {
    ((t * t * 37 + t * 11) % 17) as f64 - 8.0
}

/// Monthly-like series with trend, seasonality and a deterministic wiggle.
pub fn seasonal_fixture(n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let tf = t as f64;
            200.0
                + 0.8 * tf
                + 25.0 * (tf * std::f64::consts::TAU / 12.0).sin()
                + 7.0 * (tf * 1.7).sin()
                + irregular(t)
        })
        .collect()
}

/// Yearly-like trending series.
pub fn trend_fixture(n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let tf = t as f64;
            100.0 + 3.0 * tf + 6.0 * (tf * 2.3).sin() + irregular(t)
        })
        .collect()
}
