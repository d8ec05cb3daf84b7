use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::likelihood::{concentrated_log_lik, css, kalman_filter};
use super::order::ArimaOrder;
use super::poly::{
    ar_roots_outside, difference, expand_ar, expand_ma, ma_roots_outside, pacf_to_ar,
};
use super::ArimaError;
use crate::optim::Bfgs;
use crate::pools::Criteria;
use crate::stats;

/// Roots of every AR and MA factor must lie outside this radius.
pub const ROOT_MARGIN: f64 = 1.001;

/// A fitted seasonal ARIMA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    /// Mean of the differenced series (a drift when `d + D = 1`).
    pub constant: Option<f64>,
    pub sigma2: f64,
    pub log_lik: f64,
    pub k: usize,
    pub n_effective: usize,
    pub criteria: Criteria,
    pub fit_seconds: f64,
    /// One-step innovations of the differenced series.
    pub residuals: Vec<f64>,
    /// Training data, kept to undo differencing when forecasting.
    pub train: Vec<f64>,
    /// Filter state for the step after the sample (mean-corrected scale).
    pub next_state: Vec<f64>,
}

impl ArimaFit {
    /// Evaluate the exact likelihood at given coefficients without
    /// optimisation.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coefficients(
        train: &[f64],
        order: ArimaOrder,
        ar: Vec<f64>,
        ma: Vec<f64>,
        sar: Vec<f64>,
        sma: Vec<f64>,
        constant: Option<f64>,
    ) -> Result<ArimaFit, ArimaError> {
        let shapes_ok = ar.len() == order.p
            && ma.len() == order.q
            && sar.len() == order.seasonal_p
            && sma.len() == order.seasonal_q
            && constant.is_some() == order.constant;
        if !shapes_ok {
            return Err(ArimaError::InvalidOrder(format!(
                "{order}: coefficient lengths do not match"
            )));
        }
        let w = prepare(train, &order)?;
        finish(train, order, &w, ar, ma, sar, sma, constant, Instant::now())
    }
}

fn prepare(train: &[f64], order: &ArimaOrder) -> Result<Vec<f64>, ArimaError> {
    order.validate()?;
    if train.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::NonFiniteData);
    }
    if train.len() <= order.n_lost() {
        return Err(ArimaError::SeriesTooShort {
            n: train.len(),
            needed: order.n_lost() + 1,
        });
    }
    let w = difference(train, order.d, order.seasonal_d, order.period);
    let k = order.n_params();
    if w.len() < k + 2 || w.len() <= order.ar_degree() {
        return Err(ArimaError::InsufficientData { n: w.len(), k });
    }
    Ok(w)
}

/// Decoded coefficients.
struct Coefficients {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
    mean: f64,
}

fn decode(order: &ArimaOrder, x: &[f64], mean_scale: f64) -> Coefficients {
    let (p, q, sp, sq) = (order.p, order.q, order.seasonal_p, order.seasonal_q);
    let tanh = |s: &[f64]| -> Vec<f64> { s.iter().map(|u| u.tanh()).collect() };
    let ar = pacf_to_ar(&tanh(&x[..p]));
    let ma: Vec<f64> = pacf_to_ar(&tanh(&x[p..p + q])).iter().map(|v| -v).collect();
    let sar = pacf_to_ar(&tanh(&x[p + q..p + q + sp]));
    let sma: Vec<f64> = pacf_to_ar(&tanh(&x[p + q + sp..p + q + sp + sq]))
        .iter()
        .map(|v| -v)
        .collect();
    let mean = if order.constant {
        x[p + q + sp + sq] * mean_scale
    } else {
        0.0
    };
    Coefficients {
        ar,
        ma,
        sar,
        sma,
        mean,
    }
}

/// Fit `order` by exact maximum likelihood, starting from a conditional sum
/// of squares fit.
pub fn arima_fit(train: &[f64], order: ArimaOrder) -> Result<ArimaFit, ArimaError> {
    let started = Instant::now();
    let w = prepare(train, &order)?;
    let n = w.len();
    let sd = stats::variance(&w).sqrt();
    let mean_scale = if sd > 0.0 {
        sd
    } else {
        stats::mean(&w).abs().max(1.0)
    };

    if order.order() == 0 {
        let mean = order.constant.then(|| stats::mean(&w));
        return finish(
            train,
            order,
            &w,
            vec![],
            vec![],
            vec![],
            vec![],
            mean,
            started,
        );
    }

    let dim = order.order() + usize::from(order.constant);
    let mut x0 = vec![0.0; dim];
    if order.constant {
        x0[dim - 1] = stats::mean(&w) / mean_scale;
    }
    let period = order.period;

    let css_objective = |x: &[f64]| -> f64 {
        let c = decode(&order, x, mean_scale);
        let phi = expand_ar(&c.ar, &c.sar, period);
        let theta = expand_ma(&c.ma, &c.sma, period);
        let z: Vec<f64> = w.iter().map(|v| v - c.mean).collect();
        let (ssq, m) = css(&phi, &theta, &z);
        if m == 0 {
            return f64::INFINITY;
        }
        (ssq.max(1e-300) / m as f64).ln()
    };
    let bfgs = Bfgs::default();
    let start = bfgs.minimize(css_objective, &x0);

    let mut ml_objective = |x: &[f64]| -> f64 {
        let c = decode(&order, x, mean_scale);
        let phi = expand_ar(&c.ar, &c.sar, period);
        let theta = expand_ma(&c.ma, &c.sma, period);
        let z: Vec<f64> = w.iter().map(|v| v - c.mean).collect();
        match kalman_filter(&phi, &theta, &z, false) {
            Some(o) => (o.ssq.max(1e-300) / n as f64).ln() + o.sum_log_f / n as f64,
            None => f64::INFINITY,
        }
    };
    let init = if start.x.iter().all(|v| v.is_finite()) && ml_objective(&start.x).is_finite() {
        start.x
    } else {
        x0
    };
    let best = bfgs.minimize(&mut ml_objective, &init);
    if !best.value.is_finite() {
        return Err(ArimaError::OptimizationFailed(order));
    }
    let c = decode(&order, &best.x, mean_scale);
    if !ar_roots_outside(&c.ar, ROOT_MARGIN) || !ar_roots_outside(&c.sar, ROOT_MARGIN) {
        return Err(ArimaError::NonStationaryFit(order));
    }
    if !ma_roots_outside(&c.ma, ROOT_MARGIN) || !ma_roots_outside(&c.sma, ROOT_MARGIN) {
        return Err(ArimaError::NonInvertibleFit(order));
    }
    let constant = order.constant.then_some(c.mean);
    finish(
        train, order, &w, c.ar, c.ma, c.sar, c.sma, constant, started,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    train: &[f64],
    order: ArimaOrder,
    w: &[f64],
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
    constant: Option<f64>,
    started: Instant,
) -> Result<ArimaFit, ArimaError> {
    let n = w.len();
    let mean = constant.unwrap_or(0.0);
    let z: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let phi = expand_ar(&ar, &sar, order.period);
    let theta = expand_ma(&ma, &sma, order.period);
    let out = kalman_filter(&phi, &theta, &z, true).ok_or(ArimaError::NonStationaryFit(order))?;
    // Floor keeps exact fits (e.g. constant differences) finite.
    let scale = w.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut out = out;
    out.ssq = out.ssq.max(n as f64 * 1e-24 * scale * scale);
    let (log_lik, sigma2) = concentrated_log_lik(&out, n);
    let k = order.n_params();
    Ok(ArimaFit {
        order,
        ar,
        ma,
        sar,
        sma,
        constant,
        sigma2,
        log_lik,
        k,
        n_effective: n,
        criteria: Criteria::compute(log_lik, k, n),
        fit_seconds: started.elapsed().as_secs_f64(),
        residuals: out.innovations,
        train: train.to_vec(),
        next_state: out.next_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn random_walk_closed_form() {
        let fit = arima_fit(&[3.0, 5.0, 4.0, 6.0], ArimaOrder::new(0, 1, 0, false)).unwrap();
        let s2 = (4.0 + 1.0 + 4.0) / 3.0;
        assert!((fit.sigma2 - s2).abs() < 1e-12);
        let ll = -1.5 * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0);
        assert!((fit.log_lik - ll).abs() < 1e-12);
        assert_eq!(fit.k, 1);
        assert_eq!(fit.n_effective, 3);
    }

    #[test]
    fn mean_model_closed_form() {
        let y = [2.0, 4.0, 9.0, 1.0, 4.0];
        let fit = arima_fit(&y, ArimaOrder::new(0, 0, 0, true)).unwrap();
        assert!((fit.constant.unwrap() - 4.0).abs() < 1e-12);
        assert!((fit.sigma2 - stats::variance(&y)).abs() < 1e-12);
    }

    #[test]
    fn recovers_ar1() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut y = vec![0.0];
        for _ in 0..499 {
            let e: f64 = StandardNormal.sample(&mut rng);
            y.push(0.7 * y.last().unwrap() + e);
        }
        let fit = arima_fit(&y, ArimaOrder::new(1, 0, 0, false)).unwrap();
        assert!((fit.ar[0] - 0.7).abs() < 0.1);
        assert!((fit.sigma2 - 1.0).abs() < 0.2);
    }

    #[test]
    fn fitted_roots_respect_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = (0..120)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                10.0 + 3.0 * ((t % 4) as f64) + e
            })
            .collect();
        let order = ArimaOrder::seasonal(1, 0, 1, 1, 0, 1, 4, true);
        match arima_fit(&y, order) {
            Ok(fit) => {
                assert!(ar_roots_outside(&fit.ar, ROOT_MARGIN));
                assert!(ar_roots_outside(&fit.sar, ROOT_MARGIN));
                assert!(ma_roots_outside(&fit.ma, ROOT_MARGIN));
                assert!(ma_roots_outside(&fit.sma, ROOT_MARGIN));
            }
            Err(e) => assert!(matches!(
                e,
                ArimaError::NonStationaryFit(_) | ArimaError::NonInvertibleFit(_)
            )),
        }
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(matches!(
            arima_fit(&[1.0, 2.0, 3.0], ArimaOrder::new(2, 0, 0, true)),
            Err(ArimaError::InsufficientData { .. })
        ));
    }
}
