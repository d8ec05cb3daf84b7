use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::arima::ArimaOrder;
use crate::ets::EtsModelSpec;
use crate::pools::{profile_class, ProfileClass};

/// Percentage of selections in each profile class; every class is present.
pub fn profile_frequencies(selections: &[EtsModelSpec]) -> BTreeMap<ProfileClass, f64> {
    let mut out: BTreeMap<ProfileClass, f64> =
        ProfileClass::ALL.iter().map(|c| (*c, 0.0)).collect();
    if selections.is_empty() {
        return out;
    }
    for s in selections {
        *out.get_mut(&profile_class(s)).expect("all classes seeded") += 1.0;
    }
    let n = selections.len() as f64;
    for v in out.values_mut() {
        *v *= 100.0 / n;
    }
    out
}

/// Percentage of series whose selected order changed in each term between
/// two pools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderChanges {
    pub p: f64,
    pub q: f64,
    pub seasonal_p: f64,
    pub seasonal_q: f64,
    pub any: f64,
}

/// Compare selections `(series id, order)` from pool `K` with those from
/// pool `K - 1`. Both must cover the same series ids.
pub fn order_change_frequencies(
    selections_k: &[(String, ArimaOrder)],
    selections_km1: &[(String, ArimaOrder)],
) -> Result<OrderChanges, EvalError> {
    let a: BTreeMap<&str, &ArimaOrder> =
        selections_k.iter().map(|(i, o)| (i.as_str(), o)).collect();
    let b: BTreeMap<&str, &ArimaOrder> = selections_km1
        .iter()
        .map(|(i, o)| (i.as_str(), o))
        .collect();
    if a.len() != selections_k.len() || b.len() != selections_km1.len() {
        return Err(EvalError::IdMismatch("duplicate series id".into()));
    }
    if let Some(id) = a
        .keys()
        .find(|k| !b.contains_key(*k))
        .or_else(|| b.keys().find(|k| !a.contains_key(*k)))
    {
        return Err(EvalError::IdMismatch((*id).to_string()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut counts = [0usize; 5];
    for (id, x) in &a {
        let y = b[id];
        let diffs = [
            x.p != y.p,
            x.q != y.q,
            x.seasonal_p != y.seasonal_p,
            x.seasonal_q != y.seasonal_q,
        ];
        for (c, d) in counts.iter_mut().zip(diffs) {
            *c += usize::from(d);
        }
        counts[4] += usize::from(diffs.iter().any(|d| *d));
    }
    let pct = |c: usize| 100.0 * c as f64 / a.len() as f64;
    Ok(OrderChanges {
        p: pct(counts[0]),
        q: pct(counts[1]),
        seasonal_p: pct(counts[2]),
        seasonal_q: pct(counts[3]),
        any: pct(counts[4]),
    })
}
