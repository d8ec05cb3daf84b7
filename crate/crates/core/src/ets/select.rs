use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::fit::{ets_fit, EtsFit};
use super::spec::EtsModelSpec;
use super::EtsError;
use crate::pools::Criterion;

/// Outcome of one candidate in a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLog {
    pub spec: EtsModelSpec,
    /// Criterion value, absent when the fit failed.
    pub criterion: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Winning fit plus the per-candidate log in canonical order.
#[derive(Debug, Clone)]
pub struct EtsSelection {
    pub fit: EtsFit,
    pub criterion: f64,
    pub log: Vec<CandidateLog>,
    /// Candidates dropped before fitting because the data are not positive.
    pub excluded: Vec<EtsModelSpec>,
}

/// Fit every candidate in `pool` and keep the one with the smallest criterion.
///
/// Seasonal candidates are removed when `period < 2`; candidates that need
/// positive data are removed (and reported in `excluded`) when any training
/// value is `<= 0`. Exact ties go to the earlier model in canonical order.
pub fn ets_select(
    train: &[f64],
    period: usize,
    pool: &[EtsModelSpec],
    criterion: Criterion,
) -> Result<EtsSelection, EtsError> {
    let mut candidates: Vec<EtsModelSpec> = pool
        .iter()
        .copied()
        .filter(|s| period >= 2 || !s.is_seasonal())
        .collect();
    candidates.sort();
    candidates.dedup();
    if candidates.is_empty() {
        return Err(EtsError::EmptyPool);
    }
    let positive = train.iter().all(|&v| v > 0.0);
    let (candidates, excluded): (Vec<_>, Vec<_>) = candidates
        .into_iter()
        .partition(|s| positive || !s.needs_positive_data());

    let mut log = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, EtsFit)> = None;
    for spec in candidates {
        let started = Instant::now();
        let outcome = ets_fit(train, period, spec).and_then(|fit| {
            criterion
                .value(fit.log_lik, fit.k, fit.n)
                .map(|c| (c, fit))
                .map_err(|e| EtsError::InvalidParameter(e.to_string()))
        });
        let seconds = started.elapsed().as_secs_f64();
        match outcome {
            Ok((c, fit)) => {
                log.push(CandidateLog {
                    spec,
                    criterion: Some(c),
                    seconds,
                    error: None,
                });
                if best.as_ref().is_none_or(|(b, _)| c < *b) {
                    best = Some((c, fit));
                }
            }
            Err(e) => log.push(CandidateLog {
                spec,
                criterion: None,
                seconds,
                error: Some(e.to_string()),
            }),
        }
    }
    let (criterion, fit) = best.ok_or(EtsError::AllModelsFailed)?;
    Ok(EtsSelection {
        fit,
        criterion,
        log,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pools::{ets_pool, CriterionKind, EtsPoolName};

    #[test]
    fn singleton_pool() {
        let y: Vec<f64> = (0..30).map(|t| (t as f64).sin() + 0.2 * t as f64).collect();
        let ann: EtsModelSpec = "ANN".parse().unwrap();
        let sel = ets_select(&y, 1, &[ann], Criterion::default()).unwrap();
        assert_eq!(sel.fit.spec, ann);
        assert_eq!(sel.log.len(), 1);
    }

    #[test]
    fn non_positive_data_drops_multiplicative_candidates() {
        let y: Vec<f64> = (0..30).map(|t| (t as f64 * 0.9).sin() * 3.0).collect();
        let pool = ets_pool(EtsPoolName::Reduced, false);
        let sel = ets_select(&y, 1, &pool, Criterion::default()).unwrap();
        let names: Vec<String> = sel.excluded.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["MNN", "MAdN"]);
        assert!(sel.log.iter().all(|l| !l.spec.needs_positive_data()));
    }

    #[test]
    fn selected_is_criterion_minimal() {
        let y: Vec<f64> = (0..40)
            .map(|t| {
                20.0 + 0.5 * t as f64 + [2.0, -1.0, 0.5, -1.5][t % 4] + ((t * 13) % 7) as f64 * 0.3
            })
            .collect();
        let pool = ets_pool(EtsPoolName::Reduced, true);
        let sel = ets_select(&y, 4, &pool, Criterion::new(CriterionKind::Aicc)).unwrap();
        for entry in &sel.log {
            if let Some(c) = entry.criterion {
                assert!(sel.criterion <= c);
            }
        }
        let specs: Vec<_> = sel.log.iter().map(|l| l.spec).collect();
        let mut sorted = specs.clone();
        sorted.sort();
        assert_eq!(specs, sorted);
    }

    #[test]
    fn seasonal_candidates_removed_for_period_one() {
        let y: Vec<f64> = (0..20).map(|t| 5.0 + t as f64).collect();
        let pool = ets_pool(EtsPoolName::Reduced, true);
        let sel = ets_select(&y, 1, &pool, Criterion::default()).unwrap();
        let names: Vec<String> = sel.log.iter().map(|l| l.spec.to_string()).collect();
        assert_eq!(names, ["ANN", "AAdN", "MNN", "MAdN"]);
    }
}
