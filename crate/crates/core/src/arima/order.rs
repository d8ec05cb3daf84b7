use std::fmt;

use serde::{Deserialize, Serialize};

use super::ArimaError;

/// Structure of a seasonal ARIMA model `(p,d,q)(P,D,Q)[s]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub period: usize,
    pub constant: bool,
}

impl ArimaOrder {
    /// Non-seasonal order.
    pub fn new(p: usize, d: usize, q: usize, constant: bool) -> Self {
        ArimaOrder {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            period: 1,
            constant,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn seasonal(
        p: usize,
        d: usize,
        q: usize,
        seasonal_p: usize,
        seasonal_d: usize,
        seasonal_q: usize,
        period: usize,
        constant: bool,
    ) -> Self {
        ArimaOrder {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            period,
            constant,
        }
    }

    /// `p + q + P + Q`.
    pub fn order(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Parameter count: ARMA coefficients, the constant and the variance.
    pub fn n_params(&self) -> usize {
        self.order() + usize::from(self.constant) + 1
    }

    pub fn is_seasonal(&self) -> bool {
        self.period > 1
    }

    /// Number of observations lost to differencing.
    pub fn n_lost(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    /// Degree of the expanded autoregressive polynomial.
    pub fn ar_degree(&self) -> usize {
        self.p + self.seasonal_p * self.period
    }

    /// Degree of the expanded moving-average polynomial.
    pub fn ma_degree(&self) -> usize {
        self.q + self.seasonal_q * self.period
    }

    pub fn validate(&self) -> Result<(), ArimaError> {
        if self.period == 0 {
            return Err(ArimaError::InvalidOrder(format!("{self}: period 0")));
        }
        if self.period == 1 && (self.seasonal_p + self.seasonal_d + self.seasonal_q) > 0 {
            return Err(ArimaError::InvalidOrder(format!(
                "{self}: seasonal terms need a period above 1"
            )));
        }
        if self.constant && self.d + self.seasonal_d > 1 {
            return Err(ArimaError::InvalidOrder(format!(
                "{self}: a constant needs d + D <= 1"
            )));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)?;
        if self.period > 1 {
            write!(
                f,
                "({},{},{})[{}]",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
            )?;
        }
        if self.constant {
            f.write_str("+c")?;
        }
        Ok(())
    }
}

/// `(p, q, P, Q)` tuples with `p + q + P + Q <= k` in lexicographic order;
/// `P = Q = 0` when not seasonal.
pub fn order_tuples(k: usize, seasonal: bool) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for p in 0..=k {
        for q in 0..=k - p {
            if seasonal {
                for sp in 0..=k - p - q {
                    for sq in 0..=k - p - q - sp {
                        out.push([p, q, sp, sq]);
                    }
                }
            } else {
                out.push([p, q, 0, 0]);
            }
        }
    }
    out
}

/// Closed form of `order_tuples(k, seasonal).len()`: `C(k+4, 4)` or `C(k+2, 2)`.
pub fn count_order_tuples(k: usize, seasonal: bool) -> usize {
    if seasonal {
        (k + 1) * (k + 2) * (k + 3) * (k + 4) / 24
    } else {
        (k + 1) * (k + 2) / 2
    }
}
