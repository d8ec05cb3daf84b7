use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::model::{self, Coefs, EtsParams, EtsState};
use super::spec::{ErrorType, EtsModelSpec, SeasonalType};
use super::EtsError;
use crate::optim::NelderMead;
use crate::pools::Criteria;
use crate::stats;

const ALPHA_LO: f64 = 1e-4;
const ALPHA_HI: f64 = 0.9999;
const BETA_LO: f64 = 1e-4;
const GAMMA_LO: f64 = 1e-4;
const PHI_LO: f64 = 0.8;
const PHI_HI: f64 = 0.98;

/// Options for [`ets_fit_with`]. Pinned parameters are held fixed and not
/// counted in `k`.
#[derive(Debug, Clone, Default)]
pub struct EtsFitOptions {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
    pub optimizer: NelderMead,
}

/// A fitted exponential smoothing model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsFit {
    pub spec: EtsModelSpec,
    pub period: usize,
    pub params: EtsParams,
    /// Phase-indexed initial states.
    pub initial_state: EtsState,
    /// States at the forecast origin; `season[j]` applies `j + 1` steps ahead.
    pub final_state: EtsState,
    /// Innovation variance (relative for multiplicative errors), `SSE / (n - k)`.
    pub sigma2: f64,
    pub log_lik: f64,
    pub k: usize,
    pub n: usize,
    pub criteria: Criteria,
    pub fit_seconds: f64,
    /// One-step in-sample forecasts.
    pub fitted: Vec<f64>,
    /// Innovations: `y - mu` (additive error) or `(y - mu) / mu`.
    pub residuals: Vec<f64>,
}

impl EtsFit {
    /// In-sample one-step mean squared error on the data scale.
    pub fn mse(&self, train: &[f64]) -> f64 {
        train
            .iter()
            .zip(&self.fitted)
            .map(|(y, f)| (y - f).powi(2))
            .sum::<f64>()
            / train.len() as f64
    }

    /// Run the recursion from given parameters and initial states without
    /// optimisation. `k` counts every parameter the spec would estimate.
    pub fn from_parameters(
        train: &[f64],
        period: usize,
        spec: EtsModelSpec,
        params: EtsParams,
        initial_state: EtsState,
    ) -> Result<EtsFit, EtsError> {
        check_inputs(train, period, spec)?;
        let m = if spec.is_seasonal() { period } else { 1 };
        let k = spec.n_params(m);
        let coefs = Coefs::from_params(&params);
        finish(
            train,
            period,
            spec,
            params,
            &coefs,
            initial_state,
            k,
            1.0,
            Instant::now(),
        )
    }
}

fn check_inputs(train: &[f64], period: usize, spec: EtsModelSpec) -> Result<(), EtsError> {
    if !spec.is_applicable() {
        return Err(EtsError::InapplicableModel(spec));
    }
    if spec.is_seasonal() && period < 2 {
        return Err(EtsError::SeasonalPeriodRequired(period));
    }
    if train.iter().any(|v| !v.is_finite()) {
        return Err(EtsError::NonFiniteData);
    }
    if spec.needs_positive_data() && train.iter().any(|&v| v <= 0.0) {
        return Err(EtsError::NonPositiveData(spec));
    }
    Ok(())
}

/// Fit `spec` to `train` by maximum likelihood with default options.
pub fn ets_fit(train: &[f64], period: usize, spec: EtsModelSpec) -> Result<EtsFit, EtsError> {
    ets_fit_with(train, period, spec, &EtsFitOptions::default())
}

/// Which smoothing parameters are free, in vector order.
#[derive(Debug, Clone, Copy)]
struct Layout {
    alpha: bool,
    beta: bool,
    gamma: bool,
    phi: bool,
    trend: bool,
    m: usize,
}

impl Layout {
    fn n_smoothing(&self) -> usize {
        usize::from(self.alpha)
            + usize::from(self.beta)
            + usize::from(self.gamma)
            + usize::from(self.phi)
    }
}

pub fn ets_fit_with(
    train: &[f64],
    period: usize,
    spec: EtsModelSpec,
    opts: &EtsFitOptions,
) -> Result<EtsFit, EtsError> {
    let started = Instant::now();
    check_inputs(train, period, spec)?;
    let n = train.len();
    let m = if spec.is_seasonal() { period } else { 1 };
    let seasonal = spec.is_seasonal();
    if seasonal
        && spec.seasonal == SeasonalType::Multiplicative
        && train.iter().all(|&v| v == train[0])
    {
        return Err(EtsError::DegenerateSeries);
    }

    let pinned = |v: Option<f64>, present: bool| if present { v } else { None };
    let pin_alpha = opts.alpha;
    let pin_beta = pinned(opts.beta, spec.has_trend());
    let pin_gamma = pinned(opts.gamma, seasonal);
    let pin_phi = pinned(opts.phi, spec.trend.is_damped());
    for (name, v) in [
        ("alpha", pin_alpha),
        ("beta", pin_beta),
        ("gamma", pin_gamma),
        ("phi", pin_phi),
    ] {
        if let Some(v) = v {
            if !(0.0..=1.0).contains(&v) {
                return Err(EtsError::InvalidParameter(format!("{name} = {v}")));
            }
        }
    }
    if pin_alpha == Some(0.0) && spec.has_trend() {
        return Err(EtsError::InvalidParameter("alpha = 0 with a trend".into()));
    }
    let n_pinned = [pin_alpha, pin_beta, pin_gamma, pin_phi]
        .iter()
        .filter(|v| v.is_some())
        .count();
    let k = spec.n_params(m) - n_pinned;
    if n < k + 2 {
        return Err(EtsError::InsufficientData { n, k });
    }

    // Work on data divided by a power of two so the optimisation is invariant
    // to rescaling by powers of two and well conditioned.
    let max_abs = train.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if max_abs > 0.0 {
        2f64.powi(max_abs.log2().floor() as i32)
    } else {
        1.0
    };
    let z: Vec<f64> = train.iter().map(|v| v / scale).collect();

    let layout = Layout {
        alpha: pin_alpha.is_none(),
        beta: spec.has_trend() && pin_beta.is_none(),
        gamma: seasonal && pin_gamma.is_none(),
        phi: spec.trend.is_damped() && pin_phi.is_none(),
        trend: spec.has_trend(),
        m: if seasonal { m } else { 0 },
    };

    let init = model::heuristic_state(&spec, &z, m);
    let alpha0 = pin_alpha.unwrap_or(ALPHA_LO + 0.2 * (ALPHA_HI - ALPHA_LO) / period.max(1) as f64);
    let beta0 = pin_beta.unwrap_or((0.1 * alpha0).max(BETA_LO));
    let gamma0 = pin_gamma.unwrap_or((0.05 * (1.0 - alpha0)).max(GAMMA_LO));
    let phi0 = pin_phi.unwrap_or(PHI_LO + 0.99 * (PHI_HI - PHI_LO));

    let spread = {
        let sd = stats::variance(&z).sqrt();
        if sd > 0.0 {
            sd
        } else {
            0.1 * z.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-3)
        }
    };
    let mut x0 = Vec::new();
    let mut steps = Vec::new();
    if layout.alpha {
        x0.push(alpha0);
        steps.push((0.5 * (ALPHA_HI - alpha0)).min(0.1));
    }
    if layout.beta {
        x0.push(beta0);
        steps.push(0.5 * beta0);
    }
    if layout.gamma {
        x0.push(gamma0);
        steps.push(gamma0);
    }
    if layout.phi {
        x0.push(phi0);
        steps.push(-0.05);
    }
    x0.push(init.level);
    steps.push(0.2 * spread + 0.01 * init.level.abs());
    if let Some(b) = init.trend {
        x0.push(b);
        steps.push(if spec.trend.is_multiplicative() {
            0.01
        } else {
            0.05 * spread + 0.1 * b.abs()
        });
    }
    if seasonal {
        for &s in &init.season[..m - 1] {
            x0.push(s);
            steps.push(if spec.seasonal == SeasonalType::Multiplicative {
                0.02
            } else {
                0.1 * spread
            });
        }
    }

    let fixed = (pin_alpha, pin_beta, pin_gamma, pin_phi);
    let mult_error = spec.error == ErrorType::Multiplicative;
    let sse_floor = n as f64 * 1e-24;
    let mut season_buf = vec![0.0; layout.m];
    let objective = |x: &[f64]| -> f64 {
        let Some((c, level, trend)) = unpack(&spec, &layout, fixed, x, &mut season_buf) else {
            return f64::INFINITY;
        };
        match model::pass(&spec, &c, &z, level, trend, &mut season_buf, None) {
            Some((st, _, _)) => {
                let mut v = n as f64 * st.sse.max(sse_floor).ln();
                if mult_error {
                    v += 2.0 * st.sum_log_mu;
                }
                v
            }
            None => f64::INFINITY,
        }
    };
    let best = opts.optimizer.minimize(objective, &x0, &steps);
    if !best.value.is_finite() {
        return Err(EtsError::OptimizationFailed(spec));
    }

    let mut season = vec![0.0; layout.m];
    let (coefs, level, trend) = unpack(&spec, &layout, fixed, &best.x, &mut season)
        .ok_or(EtsError::OptimizationFailed(spec))?;
    let params = EtsParams {
        alpha: coefs.alpha,
        beta: spec.has_trend().then_some(coefs.beta),
        gamma: seasonal.then_some(coefs.gamma),
        phi: spec.trend.is_damped().then_some(coefs.phi),
    };
    // Back to the data scale.
    let additive_scale = |v: f64| v * scale;
    let initial_state = EtsState {
        level: additive_scale(level),
        trend: layout.trend.then(|| {
            if spec.trend.is_multiplicative() {
                trend
            } else {
                additive_scale(trend)
            }
        }),
        season: season
            .iter()
            .map(|&s| {
                if spec.seasonal == SeasonalType::Multiplicative {
                    s
                } else {
                    additive_scale(s)
                }
            })
            .collect(),
    };
    finish(
        train,
        period,
        spec,
        params,
        &coefs,
        initial_state,
        k,
        scale,
        started,
    )
}

/// Decode the optimisation vector, writing phase-indexed seasonal states into
/// `season`. Returns `None` outside the admissible region.
fn unpack(
    spec: &EtsModelSpec,
    layout: &Layout,
    fixed: (Option<f64>, Option<f64>, Option<f64>, Option<f64>),
    x: &[f64],
    season: &mut [f64],
) -> Option<(Coefs, f64, f64)> {
    let mut i = 0;
    let mut next = |free: bool, pin: Option<f64>, default: f64| {
        if free {
            i += 1;
            x[i - 1]
        } else {
            pin.unwrap_or(default)
        }
    };
    let alpha = next(layout.alpha, fixed.0, 0.0);
    let beta = next(layout.beta, fixed.1, 0.0);
    let gamma = next(layout.gamma, fixed.2, 0.0);
    let phi = next(layout.phi, fixed.3, 1.0);
    if layout.alpha && !(ALPHA_LO..=ALPHA_HI).contains(&alpha) {
        return None;
    }
    if spec.has_trend() && layout.beta && !(beta >= BETA_LO && beta < alpha) {
        return None;
    }
    if spec.is_seasonal() && layout.gamma && !(gamma >= GAMMA_LO && gamma < 1.0 - alpha) {
        return None;
    }
    if layout.phi && !(PHI_LO..=PHI_HI).contains(&phi) {
        return None;
    }
    let mut j = layout.n_smoothing();
    let level = x[j];
    j += 1;
    let trend = if layout.trend {
        j += 1;
        x[j - 1]
    } else {
        0.0
    };
    if layout.m > 0 {
        let m = layout.m;
        let free = &x[j..j + m - 1];
        season[..m - 1].copy_from_slice(free);
        let sum: f64 = free.iter().sum();
        if spec.seasonal == SeasonalType::Multiplicative {
            season[m - 1] = m as f64 - sum;
            if season.iter().any(|&s| s <= 0.0) {
                return None;
            }
        } else {
            season[m - 1] = -sum;
        }
    }
    if spec.trend.is_multiplicative() && (level <= 0.0 || trend <= 0.0) {
        return None;
    }
    if !(level.is_finite() && trend.is_finite()) {
        return None;
    }
    Some((
        Coefs {
            alpha,
            beta,
            gamma,
            phi,
        },
        level,
        trend,
    ))
}

/// Final pass on the data scale: fitted values, residuals, likelihood.
#[allow(clippy::too_many_arguments)]
fn finish(
    train: &[f64],
    period: usize,
    spec: EtsModelSpec,
    params: EtsParams,
    coefs: &Coefs,
    initial_state: EtsState,
    k: usize,
    scale: f64,
    started: Instant,
) -> Result<EtsFit, EtsError> {
    let n = train.len();
    let mut season = initial_state.season.clone();
    let mut trace = Vec::with_capacity(n);
    let (st, level, trend) = model::pass(
        &spec,
        coefs,
        train,
        initial_state.level,
        initial_state.trend.unwrap_or(0.0),
        &mut season,
        Some(&mut trace),
    )
    .ok_or(EtsError::OptimizationFailed(spec))?;
    let (fitted, residuals): (Vec<f64>, Vec<f64>) = trace.into_iter().unzip();

    let nf = n as f64;
    // Floor relative to the data scale so constant series give a finite likelihood.
    let floor = if spec.error == ErrorType::Multiplicative {
        nf * 1e-24
    } else {
        nf * 1e-24 * scale * scale
    };
    let sse = st.sse.max(floor);
    let log_lik = -0.5 * nf * ((2.0 * std::f64::consts::PI * sse / nf).ln() + 1.0) - st.sum_log_mu;
    let sigma2 = st.sse / (n.saturating_sub(k).max(1)) as f64;
    let final_state = EtsState {
        level,
        trend: spec.has_trend().then_some(trend),
        season: model::rotate_ahead(&season, n),
    };
    Ok(EtsFit {
        spec,
        period,
        params,
        initial_state,
        final_state,
        sigma2,
        log_lik,
        k,
        n,
        criteria: Criteria::compute(log_lik, k, n),
        fit_seconds: started.elapsed().as_secs_f64(),
        fitted,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> EtsModelSpec {
        s.parse().unwrap()
    }

    #[test]
    fn constant_series_fits_flat_level() {
        let y = [5.0; 6];
        let fit = ets_fit(&y, 1, spec("ANN")).unwrap();
        assert!((fit.final_state.level - 5.0).abs() < 1e-9);
        assert_eq!(fit.k, 3);
        assert!(fit.log_lik.is_finite());
    }

    #[test]
    fn alpha_one_is_naive() {
        let y = [3.0, 7.0, 4.0, 9.0, 2.0, 8.0, 5.0, 6.0];
        let opts = EtsFitOptions {
            alpha: Some(1.0),
            ..Default::default()
        };
        let fit = ets_fit_with(&y, 1, spec("ANN"), &opts).unwrap();
        for t in 1..y.len() {
            assert!((fit.fitted[t] - y[t - 1]).abs() < 1e-12);
        }
        assert_eq!(fit.k, 2);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let y = [1.0, 2.0, -1.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(
            ets_fit(&y, 1, spec("MNN")).unwrap_err(),
            EtsError::NonPositiveData(spec("MNN"))
        );
        assert_eq!(
            ets_fit(&y, 1, spec("AMN")).unwrap_err(),
            EtsError::InapplicableModel(spec("AMN"))
        );
        assert_eq!(
            ets_fit(&y, 1, spec("ANA")).unwrap_err(),
            EtsError::SeasonalPeriodRequired(1)
        );
        assert!(matches!(
            ets_fit(&[1.0, 2.0, 3.0], 1, spec("AAN")),
            Err(EtsError::InsufficientData { .. })
        ));
        assert_eq!(
            ets_fit(&[4.0; 16], 4, spec("MNM")).unwrap_err(),
            EtsError::DegenerateSeries
        );
    }

    #[test]
    fn fitted_parameters_respect_bounds() {
        let y: Vec<f64> = (0..40)
            .map(|t| 50.0 + 0.8 * t as f64 + 6.0 * ((t % 4) as f64 - 1.5) + ((t * 7) % 5) as f64)
            .collect();
        for s in ["AAdA", "MAdM", "MNA", "MMdM"] {
            let fit = ets_fit(&y, 4, spec(s)).unwrap();
            let p = fit.params;
            assert!(p.alpha > 0.0 && p.alpha < 1.0);
            if let Some(b) = p.beta {
                assert!(b > 0.0 && b < p.alpha);
            }
            if let Some(g) = p.gamma {
                assert!(g > 0.0 && g < 1.0 - p.alpha);
            }
            if let Some(phi) = p.phi {
                assert!((0.8..=0.98).contains(&phi));
            }
            let season = &fit.initial_state.season;
            if spec(s).seasonal == SeasonalType::Multiplicative {
                assert!(season.iter().all(|v| *v > 0.0));
                assert!((stats::mean(season) - 1.0).abs() < 1e-9);
            } else {
                assert!(season.iter().sum::<f64>().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deterministic() {
        let y: Vec<f64> = (0..30).map(|t| 10.0 + (t as f64 * 0.7).sin()).collect();
        let a = ets_fit(&y, 1, spec("MAdN")).unwrap();
        let b = ets_fit(&y, 1, spec("MAdN")).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log_lik, b.log_lik);
    }
}
