use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::fit::EtsFit;
use super::model::{self, Coefs};
use super::spec::{ErrorType, SeasonalType, TrendType};
use super::EtsError;
use crate::forecast::{normalize_levels, Forecast, ForecastError, Interval, IntervalMethod};
use crate::stats;

/// Sample paths used for simulated intervals unless the caller overrides it.
pub const DEFAULT_PATHS: usize = 5000;

/// Point forecasts and prediction intervals for steps `1..=h`.
///
/// Intervals are analytic for every model except those with a multiplicative
/// trend, which use `paths` simulated sample paths drawn from a generator
/// seeded with `seed`.
pub fn ets_forecast(
    fit: &EtsFit,
    h: usize,
    levels: &[f64],
    paths: usize,
    seed: u64,
) -> Result<Forecast, EtsError> {
    if h == 0 {
        return Err(ForecastError::ZeroHorizon.into());
    }
    let levels = normalize_levels(levels)?;
    let spec = fit.spec;
    let mut point = point_forecasts(fit, h);

    if spec.needs_simulation() {
        let sims = simulate(fit, h, paths.max(1), seed);
        let intervals = levels
            .iter()
            .map(|&level| {
                let a = 1.0 - level;
                let (lower, upper) = sims
                    .iter()
                    .map(|col| {
                        (
                            stats::quantile_sorted(col, a / 2.0),
                            stats::quantile_sorted(col, 1.0 - a / 2.0),
                        )
                    })
                    .unzip();
                Interval {
                    level,
                    lower,
                    upper,
                }
            })
            .collect();
        return Ok(Forecast {
            point,
            intervals,
            source: spec.to_string(),
            method: IntervalMethod::Simulated,
        });
    }

    let var = match (spec.error, spec.seasonal) {
        (ErrorType::Additive, _) => additive_variance(fit, h),
        (ErrorType::Multiplicative, SeasonalType::Multiplicative) => {
            let (mean, var) = class3_moments(fit, h);
            point = mean;
            var
        }
        (ErrorType::Multiplicative, _) => multiplicative_variance(fit, &point),
    };
    let intervals = levels
        .iter()
        .map(|&level| {
            let z = stats::z_for_level(level);
            let (lower, upper) = point
                .iter()
                .zip(&var)
                .map(|(p, v)| {
                    let w = z * v.max(0.0).sqrt();
                    (p - w, p + w)
                })
                .unzip();
            Interval {
                level,
                lower,
                upper,
            }
        })
        .collect();
    Ok(Forecast {
        point,
        intervals,
        source: spec.to_string(),
        method: IntervalMethod::Analytic,
    })
}

/// Deterministic recursion with zero future innovations.
fn point_forecasts(fit: &EtsFit, h: usize) -> Vec<f64> {
    let st = &fit.final_state;
    let l = st.level;
    let b = st.trend.unwrap_or(0.0);
    let phi = fit.params.phi.unwrap_or(1.0);
    let mut phi_sum = 0.0;
    let mut phi_pow = 1.0;
    (1..=h)
        .map(|i| {
            phi_pow *= phi;
            phi_sum += phi_pow;
            let trend_part = match fit.spec.trend {
                TrendType::None => l,
                TrendType::Additive => l + i as f64 * b,
                TrendType::AdditiveDamped => l + phi_sum * b,
                TrendType::Multiplicative => l * b.powi(i as i32),
                TrendType::MultiplicativeDamped => l * b.powf(phi_sum),
            };
            let m = st.season.len();
            match fit.spec.seasonal {
                SeasonalType::None => trend_part,
                SeasonalType::Additive => trend_part + st.season[(i - 1) % m],
                SeasonalType::Multiplicative => trend_part * st.season[(i - 1) % m],
            }
        })
        .collect()
}

/// `c_j = alpha + beta * (j or phi_j) + gamma * [j mod m == 0]` for `j = 1..h-1`.
fn psi_coefficients(fit: &EtsFit, h: usize) -> Vec<f64> {
    let p = &fit.params;
    let beta = p.beta.unwrap_or(0.0);
    let gamma = p.gamma.unwrap_or(0.0);
    let phi = p.phi.unwrap_or(1.0);
    let m = fit.final_state.season.len();
    let mut phi_sum = 0.0;
    let mut phi_pow = 1.0;
    (1..h)
        .map(|j| {
            phi_pow *= phi;
            phi_sum += phi_pow;
            let trend = match fit.spec.trend {
                TrendType::None => 0.0,
                TrendType::AdditiveDamped => beta * phi_sum,
                _ => beta * j as f64,
            };
            let season = if m > 0 && j % m == 0 { gamma } else { 0.0 };
            p.alpha + trend + season
        })
        .collect()
}

/// Additive errors: `v_h = sigma2 * (1 + sum_{j<h} c_j^2)`.
fn additive_variance(fit: &EtsFit, h: usize) -> Vec<f64> {
    let c = psi_coefficients(fit, h);
    let mut acc = 1.0;
    let mut out = Vec::with_capacity(h);
    out.push(fit.sigma2);
    for cj in c {
        acc += cj * cj;
        out.push(fit.sigma2 * acc);
    }
    out
}

/// Multiplicative errors with linear trend and non-multiplicative seasonality:
/// `theta_h = mu_h^2 + sigma2 * sum_{j<h} c_j^2 theta_{h-j}` and
/// `v_h = (1 + sigma2) theta_h - mu_h^2`.
fn multiplicative_variance(fit: &EtsFit, mean: &[f64]) -> Vec<f64> {
    let h = mean.len();
    let c = psi_coefficients(fit, h);
    let s2 = fit.sigma2;
    let mut theta: Vec<f64> = Vec::with_capacity(h);
    for i in 0..h {
        let mut t = mean[i] * mean[i];
        for j in 1..=i {
            t += s2 * c[j - 1] * c[j - 1] * theta[i - j];
        }
        theta.push(t);
    }
    theta
        .iter()
        .zip(mean)
        .map(|(t, mu)| (1.0 + s2) * t - mu * mu)
        .collect()
}

/// Mean and variance for multiplicative error with multiplicative seasonality,
/// via the moments of `vec(x z')` where `x` holds level (and trend) and `z` the
/// seasonal states ordered most recent first.
fn class3_moments(fit: &EtsFit, h: usize) -> (Vec<f64>, Vec<f64>) {
    let st = &fit.final_state;
    let p = &fit.params;
    let s2 = fit.sigma2;
    let m = st.season.len();
    let (h1, f1, g1, x) = match fit.spec.trend {
        TrendType::None => (
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, p.alpha),
            DVector::from_element(1, st.level),
        ),
        _ => {
            let phi = p.phi.unwrap_or(1.0);
            let (a, b) = (p.alpha, p.beta.unwrap_or(0.0));
            (
                DMatrix::from_row_slice(1, 2, &[1.0, phi]),
                DMatrix::from_row_slice(2, 2, &[1.0, phi, 0.0, phi]),
                DMatrix::from_row_slice(2, 2, &[a, a * phi, b, b * phi]),
                DVector::from_row_slice(&[st.level, st.trend.unwrap_or(0.0)]),
            )
        }
    };
    let z = DVector::from_iterator(m, st.season.iter().rev().copied());
    let mut h2 = DMatrix::zeros(1, m);
    h2[(0, m - 1)] = 1.0;
    let mut f2 = DMatrix::zeros(m, m);
    f2[(0, m - 1)] = 1.0;
    for i in 1..m {
        f2[(i, i - 1)] = 1.0;
    }
    let mut g2 = DMatrix::zeros(m, m);
    g2[(0, m - 1)] = p.gamma.unwrap_or(0.0);

    let h21 = h2.kronecker(&h1);
    let f21 = f2.kronecker(&f1);
    let g21 = g2.kronecker(&g1);
    let kk = g2.kronecker(&f1) + f2.kronecker(&g1);

    let mut mh = &x * z.transpose();
    let dim = mh.len();
    let mut vh = DMatrix::<f64>::zeros(dim, dim);
    let mut mean = Vec::with_capacity(h);
    let mut var = Vec::with_capacity(h);
    for _ in 0..h {
        let mu = (&h1 * &mh * h2.transpose())[(0, 0)];
        let var_mu = (&h21 * &vh * h21.transpose())[(0, 0)];
        mean.push(mu);
        var.push((1.0 + s2) * var_mu + s2 * mu * mu);

        let vec_m = DVector::from_column_slice(mh.as_slice());
        let mm = &vec_m * vec_m.transpose();
        let inner = &f21 * &vh * g21.transpose()
            + &g21 * &vh * f21.transpose()
            + &kk * (&vh + &mm) * kk.transpose()
            + (&g21 * (&vh * 3.0 + &mm * 2.0) * g21.transpose()) * s2;
        vh = &f21 * &vh * f21.transpose() + inner * s2;
        mh = &f1 * &mh * f2.transpose() + (&g1 * &mh * g2.transpose()) * s2;
    }
    (mean, var)
}

/// Simulated future values, one sorted column of `paths` draws per step.
fn simulate(fit: &EtsFit, h: usize, paths: usize, seed: u64) -> Vec<Vec<f64>> {
    let spec = fit.spec;
    let c = Coefs::from_params(&fit.params);
    let st = &fit.final_state;
    let m = st.season.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, fit.sigma2.max(0.0).sqrt()).expect("finite sigma");
    let mut cols = vec![Vec::with_capacity(paths); h];
    let mut season = st.season.clone();
    for _ in 0..paths {
        season.copy_from_slice(&st.season);
        let mut l = st.level;
        let mut b = st.trend.unwrap_or(0.0);
        for (i, col) in cols.iter_mut().enumerate() {
            let s = if m > 0 { season[i % m] } else { 0.0 };
            let mu = model::one_step(&spec, &c, l, b, s);
            let e: f64 = noise.sample(&mut rng);
            let y = match spec.error {
                ErrorType::Additive => mu + e,
                ErrorType::Multiplicative => mu * (1.0 + e),
            };
            let next = model::update(&spec, &c, l, b, s, y);
            l = next.level;
            b = next.trend;
            if m > 0 {
                season[i % m] = next.season;
            }
            col.push(y);
        }
    }
    for col in &mut cols {
        col.sort_by(f64::total_cmp);
    }
    cols
}
