use super::fit::ArimaFit;
use super::poly::{differencing_poly, expand_ar, expand_ma, psi_weights};
use super::ArimaError;
use crate::forecast::{normalize_levels, Forecast, ForecastError, Interval, IntervalMethod};
use crate::stats;

/// Coefficients of `(1 - sum a_i B^i)(1 - sum b_j B^j)` as `1 - sum c_k B^k`.
fn ar_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut pa = vec![1.0];
    pa.extend(a.iter().map(|v| -v));
    let mut pb = vec![1.0];
    pb.extend(b.iter().map(|v| -v));
    let mut out = vec![0.0; pa.len() + pb.len() - 1];
    for (i, x) in pa.iter().enumerate() {
        for (j, y) in pb.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out[1..].iter().map(|c| -c).collect()
}

/// Point forecasts from the filter state, integrated back through the
/// differencing, with Gaussian intervals from the psi-weight variance.
pub fn arima_forecast(fit: &ArimaFit, h: usize, levels: &[f64]) -> Result<Forecast, ArimaError> {
    if h == 0 {
        return Err(ForecastError::ZeroHorizon.into());
    }
    let levels = normalize_levels(levels)?;
    let order = &fit.order;
    let phi = expand_ar(&fit.ar, &fit.sar, order.period);
    let theta = expand_ma(&fit.ma, &fit.sma, order.period);
    let mean = fit.constant.unwrap_or(0.0);

    // Differenced-scale forecasts from the state E[w_{n+1+i} | data].
    let mut x = fit.next_state.clone();
    let r = x.len();
    let mut w_fc = Vec::with_capacity(h);
    for _ in 0..h {
        w_fc.push(x[0] + mean);
        let last: f64 = (1..=phi.len()).map(|k| phi[k - 1] * x[r - k]).sum();
        x.rotate_left(1);
        x[r - 1] = last;
    }

    let delta = differencing_poly(order.d, order.seasonal_d, order.period);
    let mut ext = fit.train.clone();
    let n = ext.len();
    for (i, wf) in w_fc.iter().enumerate() {
        let t = n + i;
        let v = wf
            + delta
                .iter()
                .enumerate()
                .map(|(j, c)| c * ext[t - 1 - j])
                .sum::<f64>();
        ext.push(v);
    }
    let point = ext[n..].to_vec();

    let full_ar = ar_product(&phi, &delta);
    let psi = psi_weights(&full_ar, &theta, h);
    let mut acc = 0.0;
    let var: Vec<f64> = psi
        .iter()
        .map(|p| {
            acc += p * p;
            fit.sigma2 * acc
        })
        .collect();

    let intervals = levels
        .iter()
        .map(|&level| {
            let z = stats::z_for_level(level);
            let (lower, upper) = point
                .iter()
                .zip(&var)
                .map(|(p, v)| (p - z * v.sqrt(), p + z * v.sqrt()))
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
        source: order.to_string(),
        method: IntervalMethod::Analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::{arima_fit, ArimaOrder};

    #[test]
    fn random_walk_is_flat() {
        let fit = arima_fit(&[3.0, 5.0, 4.0, 6.0], ArimaOrder::new(0, 1, 0, false)).unwrap();
        let fc = arima_forecast(&fit, 4, &[0.95]).unwrap();
        assert_eq!(fc.point, vec![6.0; 4]);
        let iv = fc.interval(0.95).unwrap();
        let widths: Vec<f64> = iv.upper.iter().zip(&iv.lower).map(|(u, l)| u - l).collect();
        assert!(widths.windows(2).all(|p| p[1] >= p[0]));
        // Random walk variance grows linearly: width ratio sqrt(2).
        assert!((widths[1] / widths[0] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ar1_halves() {
        let y = [1.0, -2.0, 3.0, 0.5, -1.0, 2.0, 8.0];
        let fit = ArimaFit::from_coefficients(
            &y,
            ArimaOrder::new(1, 0, 0, false),
            vec![0.5],
            vec![],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        let fc = arima_forecast(&fit, 4, &[0.8]).unwrap();
        for (a, b) in fc.point.iter().zip([4.0, 2.0, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn seasonal_difference_repeats_pattern() {
        let y: Vec<f64> = (0..24).map(|t| [5.0, 9.0, 2.0, 7.0][t % 4]).collect();
        let fit = ArimaFit::from_coefficients(
            &y,
            ArimaOrder::seasonal(0, 0, 0, 0, 1, 0, 4, false),
            vec![],
            vec![],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        let fc = arima_forecast(&fit, 6, &[0.9]).unwrap();
        assert_eq!(fc.point, vec![5.0, 9.0, 2.0, 7.0, 5.0, 9.0]);
    }

    #[test]
    fn product_of_polynomials() {
        assert_eq!(ar_product(&[0.5], &[1.0]), vec![1.5, -0.5]);
    }
}
