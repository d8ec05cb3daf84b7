use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::fit::{arima_fit, ArimaFit};
use super::kpss::choose_differencing;
use super::order::{order_tuples, ArimaOrder};
use super::ArimaError;
use crate::pools::Criterion;

/// Largest total order the exhaustive search accepts.
pub const MAX_K: usize = 8;
/// Per-term bounds for the stepwise search.
pub const STEPWISE_MAX_P: usize = 5;
pub const STEPWISE_MAX_Q: usize = 5;
pub const STEPWISE_MAX_SEASONAL: usize = 2;
/// Total order bound for the stepwise search, equal to [`MAX_K`] so the
/// largest exhaustive pool contains every stepwise candidate.
pub const STEPWISE_MAX_ORDER: usize = MAX_K;

/// Outcome of one candidate order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaCandidate {
    pub order: ArimaOrder,
    pub criterion: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Winning fit, the chosen differencing orders and the candidate log.
#[derive(Debug, Clone)]
pub struct ArimaSearch {
    pub fit: ArimaFit,
    pub criterion: f64,
    pub d: usize,
    pub seasonal_d: usize,
    pub log: Vec<ArimaCandidate>,
}

struct Searcher<'a> {
    train: &'a [f64],
    criterion: Criterion,
    log: Vec<ArimaCandidate>,
    best: Option<(f64, ArimaFit)>,
}

impl<'a> Searcher<'a> {
    fn new(train: &'a [f64], criterion: Criterion) -> Self {
        Searcher {
            train,
            criterion,
            log: Vec::new(),
            best: None,
        }
    }

    /// Fit and log one order; returns its criterion value on success.
    fn evaluate(&mut self, order: ArimaOrder) -> Option<f64> {
        let started = Instant::now();
        let outcome = arima_fit(self.train, order).and_then(|fit| {
            self.criterion
                .value(fit.log_lik, fit.k, fit.n_effective)
                .map(|c| (c, fit))
                .map_err(|e| ArimaError::InvalidOrder(e.to_string()))
        });
        let seconds = started.elapsed().as_secs_f64();
        match outcome {
            Ok((c, fit)) => {
                self.log.push(ArimaCandidate {
                    order,
                    criterion: Some(c),
                    seconds,
                    error: None,
                });
                if self.best.as_ref().is_none_or(|(b, _)| c < *b) {
                    self.best = Some((c, fit));
                }
                Some(c)
            }
            Err(e) => {
                self.log.push(ArimaCandidate {
                    order,
                    criterion: None,
                    seconds,
                    error: Some(e.to_string()),
                });
                None
            }
        }
    }

    fn finish(self, d: usize, seasonal_d: usize) -> Result<ArimaSearch, ArimaError> {
        let (criterion, fit) = self.best.ok_or(ArimaError::AllModelsFailed)?;
        Ok(ArimaSearch {
            fit,
            criterion,
            d,
            seasonal_d,
            log: self.log,
        })
    }
}

fn effective_period(period: usize) -> usize {
    period.max(1)
}

fn make_order(
    t: [usize; 4],
    d: usize,
    seasonal_d: usize,
    period: usize,
    constant: bool,
) -> ArimaOrder {
    ArimaOrder::seasonal(t[0], d, t[1], t[2], seasonal_d, t[3], period, constant)
}

/// Fit every `(p, q, P, Q)` with `p + q + P + Q <= k` (with and without a
/// constant when `d + D <= 1`) after fixing `(d, D)`, and keep the
/// criterion-minimal fit. The log follows lexicographic order on
/// `(p, q, P, Q, constant)`.
pub fn arima_search_exhaustive(
    train: &[f64],
    period: usize,
    k: usize,
    criterion: Criterion,
) -> Result<ArimaSearch, ArimaError> {
    if !(1..=MAX_K).contains(&k) {
        return Err(ArimaError::InvalidMaxOrder(k));
    }
    let period = effective_period(period);
    let (d, seasonal_d) = choose_differencing(train, period)?;
    let constants: &[bool] = if d + seasonal_d <= 1 {
        &[false, true]
    } else {
        &[false]
    };
    let mut s = Searcher::new(train, criterion);
    for t in order_tuples(k, period > 1) {
        for &c in constants {
            s.evaluate(make_order(t, d, seasonal_d, period, c));
        }
    }
    s.finish(d, seasonal_d)
}

/// Stepwise hill climb over `(p, q, P, Q, constant)`.
///
/// Starts from the best of `(2,2)(1,1)`, `(0,0)(0,0)`, `(1,0)(1,0)` and
/// `(0,1)(0,1)` (seasonal parts dropped when `period = 1`), then repeatedly
/// moves to the first neighbour (one term changed by one, or the constant
/// toggled) that lowers the criterion. Each candidate is fitted at most once.
pub fn arima_search_stepwise(
    train: &[f64],
    period: usize,
    criterion: Criterion,
) -> Result<ArimaSearch, ArimaError> {
    let period = effective_period(period);
    let seasonal = period > 1;
    let (d, seasonal_d) = choose_differencing(train, period)?;
    let allow_constant = d + seasonal_d <= 1;
    let mut s = Searcher::new(train, criterion);
    let mut seen: HashMap<ArimaOrder, Option<f64>> = HashMap::new();
    let mut visit = |s: &mut Searcher, o: ArimaOrder| -> Option<f64> {
        *seen.entry(o).or_insert_with(|| s.evaluate(o))
    };

    let mut current: Option<(f64, ArimaOrder)> = None;
    for t in [[2, 2, 1, 1], [0, 0, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1]] {
        let t = if seasonal { t } else { [t[0], t[1], 0, 0] };
        let o = make_order(t, d, seasonal_d, period, allow_constant);
        if let Some(c) = visit(&mut s, o) {
            if current.is_none_or(|(b, _)| c < b) {
                current = Some((c, o));
            }
        }
    }
    if current.is_none() && allow_constant {
        let o = make_order([0, 0, 0, 0], d, seasonal_d, period, false);
        if let Some(c) = visit(&mut s, o) {
            current = Some((c, o));
        }
    }

    while let Some((best, o)) = current {
        let mut moved = false;
        for n in neighbours(&o, seasonal, allow_constant) {
            if let Some(c) = visit(&mut s, n) {
                if c < best {
                    current = Some((c, n));
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            break;
        }
    }
    s.finish(d, seasonal_d)
}

fn within_bounds(o: &ArimaOrder) -> bool {
    o.p <= STEPWISE_MAX_P
        && o.q <= STEPWISE_MAX_Q
        && o.seasonal_p <= STEPWISE_MAX_SEASONAL
        && o.seasonal_q <= STEPWISE_MAX_SEASONAL
        && o.order() <= STEPWISE_MAX_ORDER
}

fn neighbours(o: &ArimaOrder, seasonal: bool, allow_constant: bool) -> Vec<ArimaOrder> {
    let mut out = Vec::new();
    let mut push = |n: ArimaOrder| {
        if within_bounds(&n) {
            out.push(n);
        }
    };
    let terms = if seasonal { 4 } else { 2 };
    for term in 0..terms {
        for delta in [-1i64, 1] {
            let mut n = *o;
            let field = match term {
                0 => &mut n.p,
                1 => &mut n.q,
                2 => &mut n.seasonal_p,
                _ => &mut n.seasonal_q,
            };
            let v = *field as i64 + delta;
            if v < 0 {
                continue;
            }
            *field = v as usize;
            push(n);
        }
    }
    if allow_constant {
        let mut n = *o;
        n.constant = !n.constant;
        push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::collections::HashSet;

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                5.0 + e
            })
            .collect()
    }

    #[test]
    fn exhaustive_log_is_lexicographic_and_minimal() {
        let y = noise(1, 60);
        let res = arima_search_exhaustive(&y, 1, 2, Criterion::default()).unwrap();
        let keys: Vec<_> = res
            .log
            .iter()
            .map(|c| (c.order.p, c.order.q, c.order.constant))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(res.log.len(), 12);
        for c in &res.log {
            if let Some(v) = c.criterion {
                assert!(res.criterion <= v);
            }
        }
    }

    #[test]
    fn stepwise_visits_each_candidate_once() {
        let y = noise(2, 80);
        let res = arima_search_stepwise(&y, 1, Criterion::default()).unwrap();
        let set: HashSet<_> = res.log.iter().map(|c| c.order).collect();
        assert_eq!(set.len(), res.log.len());
    }

    #[test]
    fn rejects_bad_k() {
        assert!(matches!(
            arima_search_exhaustive(&noise(3, 40), 1, 9, Criterion::default()),
            Err(ArimaError::InvalidMaxOrder(9))
        ));
    }
}
