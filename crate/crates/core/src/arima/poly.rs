//! Lag-polynomial helpers.
//!
//! Autoregressive coefficients `a` describe `1 - a_1 B - ... - a_p B^p`;
//! moving-average coefficients `b` describe `1 + b_1 B + ... + b_q B^q`.

/// Coefficients of `(1 - sum a_i B^i)(1 - sum A_j B^{js})` as `1 - sum c_k B^k`.
pub fn expand_ar(ar: &[f64], sar: &[f64], period: usize) -> Vec<f64> {
    let deg = ar.len() + sar.len() * period;
    let mut full = vec![0.0; deg + 1];
    full[0] = 1.0;
    for (i, a) in ar.iter().enumerate() {
        full[i + 1] = -a;
    }
    let mut out = full.clone();
    for (j, sa) in sar.iter().enumerate() {
        let shift = (j + 1) * period;
        for i in 0..=ar.len() {
            out[i + shift] -= sa * full[i];
        }
    }
    out[1..].iter().map(|c| -c).collect()
}

/// Coefficients of `(1 + sum b_i B^i)(1 + sum B_j B^{js})` as `1 + sum c_k B^k`.
pub fn expand_ma(ma: &[f64], sma: &[f64], period: usize) -> Vec<f64> {
    let neg_ma: Vec<f64> = ma.iter().map(|v| -v).collect();
    let neg_sma: Vec<f64> = sma.iter().map(|v| -v).collect();
    expand_ar(&neg_ma, &neg_sma, period)
        .into_iter()
        .map(|c| -c)
        .collect()
}

/// Coefficients `c` of `(1-B)^d (1-B^s)^D = 1 - sum c_i B^i`.
pub fn differencing_poly(d: usize, seasonal_d: usize, period: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mul = |poly: &[f64], lag: usize| {
        let mut out = vec![0.0; poly.len() + lag];
        for (i, c) in poly.iter().enumerate() {
            out[i] += c;
            out[i + lag] -= c;
        }
        out
    };
    for _ in 0..d {
        poly = mul(&poly, 1);
    }
    for _ in 0..seasonal_d {
        poly = mul(&poly, period);
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// Apply `d` ordinary and `seasonal_d` seasonal differences.
pub fn difference(y: &[f64], d: usize, seasonal_d: usize, period: usize) -> Vec<f64> {
    let mut w = y.to_vec();
    for _ in 0..seasonal_d {
        w = w.windows(period + 1).map(|s| s[period] - s[0]).collect();
    }
    for _ in 0..d {
        w = w.windows(2).map(|s| s[1] - s[0]).collect();
    }
    w
}

/// Map partial autocorrelations in (-1, 1) to stationary AR coefficients
/// (Durbin-Levinson recursion).
pub fn pacf_to_ar(pacf: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = a.clone();
        for j in 0..k {
            a[j] = prev[j] - r * prev[k - 1 - j];
        }
        a.push(r);
    }
    a
}

/// Inverse of [`pacf_to_ar`] (step-down recursion). Returns `None` when some
/// partial autocorrelation has modulus at least one, i.e. the polynomial is
/// not stationary.
pub fn ar_to_pacf(ar: &[f64]) -> Option<Vec<f64>> {
    let mut a = ar.to_vec();
    let mut out = vec![0.0; ar.len()];
    for k in (0..ar.len()).rev() {
        let r = a[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        out[k] = r;
        let denom = 1.0 - r * r;
        let prev = a.clone();
        for j in 0..k {
            a[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        a.truncate(k);
    }
    Some(out)
}

/// True when every root of `1 - sum a_i z^i` has modulus above `margin`.
pub fn ar_roots_outside(ar: &[f64], margin: f64) -> bool {
    let scaled: Vec<f64> = ar
        .iter()
        .enumerate()
        .map(|(i, a)| a * margin.powi(i as i32 + 1))
        .collect();
    ar_to_pacf(&scaled).is_some()
}

/// True when every root of `1 + sum b_i z^i` has modulus above `margin`.
pub fn ma_roots_outside(ma: &[f64], margin: f64) -> bool {
    let neg: Vec<f64> = ma.iter().map(|v| -v).collect();
    ar_roots_outside(&neg, margin)
}

/// Weights of `theta(B) / phi(B)` up to lag `n - 1`; `phi` uses the AR sign
/// convention and `theta` the MA one.
pub fn psi_weights(phi: &[f64], theta: &[f64], n: usize) -> Vec<f64> {
    let mut psi = vec![0.0; n];
    if n == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..n {
        let mut v = theta.get(j - 1).copied().unwrap_or(0.0);
        for (i, a) in phi.iter().enumerate().take(j) {
            v += a * psi[j - 1 - i];
        }
        psi[j] = v;
    }
    psi
}
