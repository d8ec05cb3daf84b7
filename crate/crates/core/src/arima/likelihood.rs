//! Exact Gaussian likelihood of a stationary ARMA process by Kalman filtering,
//! and the conditional sum of squares used for starting values.
//!
//! The state at time `t` holds `w_t` followed by the forecasts
//! `E[w_{t+i} | w_1..w_t]` for `i = 1..r-1`, with `r = max(p, q + 1)`. Its
//! stationary covariance follows from the autocovariances and psi weights:
//! `P0[i][j] = gamma(j - i) - sum_{k<i} psi_k psi_{k+j-i}`.

use nalgebra::{DMatrix, DVector};

use super::poly::psi_weights;

/// Autocovariances `gamma(0..n)` of a unit-variance ARMA process.
pub fn arma_autocovariance(phi: &[f64], theta: &[f64], n: usize) -> Option<Vec<f64>> {
    let p = phi.len();
    let q = theta.len();
    let psi = psi_weights(phi, theta, q + 1);
    // rhs_k = sum_{j=k}^{q} theta_j psi_{j-k}, theta_0 = 1.
    let theta_at = |j: usize| if j == 0 { 1.0 } else { theta[j - 1] };
    let rhs = |k: usize| -> f64 { (k..=q).map(|j| theta_at(j) * psi[j - k]).sum() };
    let mut gamma = vec![0.0; n.max(p + 1)];
    if p == 0 {
        for (k, g) in gamma.iter_mut().enumerate() {
            *g = if k <= q { rhs(k) } else { 0.0 };
        }
    } else {
        // gamma(k) - sum_i phi_i gamma(|k - i|) = rhs_k for k = 0..p.
        let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
        let mut b = DVector::<f64>::zeros(p + 1);
        for k in 0..=p {
            a[(k, k)] += 1.0;
            for i in 1..=p {
                a[(k, k.abs_diff(i))] -= phi[i - 1];
            }
            b[k] = if k <= q { rhs(k) } else { 0.0 };
        }
        let sol = a.lu().solve(&b)?;
        gamma[..=p].copy_from_slice(sol.as_slice());
        for k in p + 1..gamma.len() {
            let mut v = if k <= q { rhs(k) } else { 0.0 };
            for i in 1..=p {
                v += phi[i - 1] * gamma[k - i];
            }
            gamma[k] = v;
        }
    }
    gamma.truncate(n);
    if gamma.iter().all(|g| g.is_finite()) && gamma.first().is_none_or(|g| *g > 0.0) {
        Some(gamma)
    } else {
        None
    }
}

/// Output of a filtering pass on the mean-corrected differenced series.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// `sum v_t^2 / F_t`.
    pub ssq: f64,
    /// `sum ln F_t`.
    pub sum_log_f: f64,
    /// One-step innovations `v_t`.
    pub innovations: Vec<f64>,
    /// State predicted for the first step after the sample.
    pub next_state: Vec<f64>,
}

/// Concentrated log-likelihood `-n/2 (ln(2 pi s2) + 1) - sum ln F / 2` with
/// `s2 = ssq / n`.
pub fn concentrated_log_lik(out: &FilterOutput, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let s2 = out.ssq / nf;
    let ll = -0.5 * (nf * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) + out.sum_log_f);
    (ll, s2)
}

/// Kalman filter for ARMA(`phi`, `theta`) on `w` (already mean-corrected).
/// Returns `None` when the process is not stationary or the filter breaks
/// down numerically.
pub fn kalman_filter(
    phi: &[f64],
    theta: &[f64],
    w: &[f64],
    keep_innovations: bool,
) -> Option<FilterOutput> {
    let p = phi.len();
    let q = theta.len();
    let r = p.max(q + 1);
    let psi = psi_weights(phi, theta, r);
    let gamma = arma_autocovariance(phi, theta, r)?;

    // P0 (row-major r x r).
    let mut pm = vec![0.0; r * r];
    for i in 0..r {
        for j in i..r {
            let mut v = gamma[j - i];
            for k in 0..i {
                v -= psi[k] * psi[k + j - i];
            }
            pm[i * r + j] = v;
            pm[j * r + i] = v;
        }
    }
    // Nonzero (k, phi_k) for the last row of the transition; seasonal
    // products are sparse.
    let phi_nz: Vec<(usize, f64)> = phi
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i + 1, *v))
        .collect();

    let mut x = vec![0.0; r];
    let mut xu = vec![0.0; r];
    let mut pu = vec![0.0; r * r];
    let mut a = vec![0.0; r * r];
    let mut gain = vec![0.0; r];
    let mut ssq = 0.0;
    let mut sum_log_f = 0.0;
    let mut innovations = if keep_innovations {
        Vec::with_capacity(w.len())
    } else {
        Vec::new()
    };
    let mut steady = false;
    let mut f_steady = 0.0;

    for &obs in w {
        let v = obs - x[0];
        let f = if steady { f_steady } else { pm[0] };
        if !f.is_finite() || f <= 0.0 {
            return None;
        }
        ssq += v * v / f;
        sum_log_f += f.ln();
        if keep_innovations {
            innovations.push(v);
        }
        if !steady {
            for i in 0..r {
                gain[i] = pm[i * r] / f;
            }
        }
        for i in 0..r {
            xu[i] = x[i] + gain[i] * v;
        }
        // x <- T xu
        x[..r - 1].copy_from_slice(&xu[1..r]);
        x[r - 1] = phi_nz.iter().map(|&(k, c)| c * xu[r - k]).sum();

        if steady {
            continue;
        }
        // Pu = P - P[:,0] P[0,:] / F
        for i in 0..r {
            let gi = gain[i];
            for j in 0..r {
                pu[i * r + j] = pm[i * r + j] - gi * pm[j];
            }
        }
        // A = T Pu
        for j in 0..r {
            for i in 0..r - 1 {
                a[i * r + j] = pu[(i + 1) * r + j];
            }
            a[(r - 1) * r + j] = phi_nz.iter().map(|&(k, c)| c * pu[(r - k) * r + j]).sum();
        }
        // P_next = A T' + R R'
        let mut change: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let mut v = if j < r - 1 {
                    a[i * r + j + 1]
                } else {
                    phi_nz.iter().map(|&(k, c)| c * a[i * r + r - k]).sum()
                };
                v += psi[i] * psi[j];
                change = change.max((v - pm[i * r + j]).abs());
                pm[i * r + j] = v;
            }
        }
        if change < 1e-12 * pm[0].abs().max(1.0) {
            steady = true;
            f_steady = pm[0];
            for i in 0..r {
                gain[i] = pm[i * r] / f_steady;
            }
        }
    }
    if !(ssq.is_finite() && sum_log_f.is_finite()) {
        return None;
    }
    Some(FilterOutput {
        ssq,
        sum_log_f,
        innovations,
        next_state: x,
    })
}

/// Conditional sum of squares of ARMA residuals with zero pre-sample
/// innovations, starting after the first `phi.len()` observations.
/// Returns (sum of squares, number of terms).
pub fn css(phi: &[f64], theta: &[f64], w: &[f64]) -> (f64, usize) {
    let p = phi.len();
    let q = theta.len();
    let n = w.len();
    if n <= p {
        return (f64::INFINITY, 0);
    }
    let mut e = vec![0.0; n];
    let mut ssq = 0.0;
    for t in p..n {
        let mut v = w[t];
        for i in 0..p {
            v -= phi[i] * w[t - 1 - i];
        }
        for j in 0..q.min(t) {
            v -= theta[j] * e[t - 1 - j];
        }
        e[t] = v;
        ssq += v * v;
    }
    (ssq, n - p)
}
