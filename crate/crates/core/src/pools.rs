//! Candidate model pools, information criteria and balanced-pool enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ets::{ErrorType, EtsModelSpec, SeasonalType, TrendType};

#[derive(Debug, Error, PartialEq)]
pub enum PoolError {
    #[error("AICc needs n > k + 1 (n = {n}, k = {k})")]
    SampleTooSmall { n: usize, k: usize },
    #[error("profile class {0:?} has no models")]
    EmptyProfileClass(ProfileClass),
    #[error("too many models for bitmask enumeration ({0})")]
    TooManyModels(usize),
    #[error("unknown pool label '{0}'")]
    UnknownPool(String),
}

/// Which information criterion drives selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Aic,
    Bic,
    #[default]
    Aicc,
}

impl FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aic" => Ok(CriterionKind::Aic),
            "bic" => Ok(CriterionKind::Bic),
            "aicc" => Ok(CriterionKind::Aicc),
            _ => Err(format!("unknown criterion '{s}'")),
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionKind::Aic => "aic",
            CriterionKind::Bic => "bic",
            CriterionKind::Aicc => "aicc",
        })
    }
}

/// Small-sample correction term used by AICc.
///
/// `Standard` adds `2k(k+1)/(n-k-1)`; `Paper` adds half of that,
/// `k(k+1)/(n-k-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AiccForm {
    #[default]
    Standard,
    Paper,
}

impl FromStr for AiccForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(AiccForm::Standard),
            "paper" => Ok(AiccForm::Paper),
            _ => Err(format!("unknown AICc form '{s}'")),
        }
    }
}

/// Criterion plus AICc correction form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Criterion {
    pub kind: CriterionKind,
    pub aicc_form: AiccForm,
}

impl Criterion {
    pub fn new(kind: CriterionKind) -> Self {
        Criterion {
            kind,
            aicc_form: AiccForm::Standard,
        }
    }

    pub fn value(&self, log_lik: f64, k: usize, n: usize) -> Result<f64, PoolError> {
        criterion_value_with(log_lik, k, n, self.kind, self.aicc_form)
    }
}

/// AIC, BIC and AICc of one fit (standard AICc form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub aic: f64,
    pub bic: f64,
    pub aicc: f64,
}

impl Criteria {
    pub fn compute(log_lik: f64, k: usize, n: usize) -> Criteria {
        let aic = -2.0 * log_lik + 2.0 * k as f64;
        Criteria {
            aic,
            bic: aic + k as f64 * ((n as f64).ln() - 2.0),
            aicc: criterion_value(log_lik, k, n, CriterionKind::Aicc).unwrap_or(f64::INFINITY),
        }
    }
}

/// AIC = -2 logL + 2k; BIC = AIC + k(ln n - 2); AICc = AIC + 2k(k+1)/(n-k-1).
pub fn criterion_value(
    log_lik: f64,
    k: usize,
    n: usize,
    which: CriterionKind,
) -> Result<f64, PoolError> {
    criterion_value_with(log_lik, k, n, which, AiccForm::Standard)
}

pub fn criterion_value_with(
    log_lik: f64,
    k: usize,
    n: usize,
    which: CriterionKind,
    form: AiccForm,
) -> Result<f64, PoolError> {
    let kf = k as f64;
    let aic = -2.0 * log_lik + 2.0 * kf;
    match which {
        CriterionKind::Aic => Ok(aic),
        CriterionKind::Bic => Ok(aic + kf * ((n as f64).ln() - 2.0)),
        CriterionKind::Aicc => {
            if n <= k + 1 {
                return Err(PoolError::SampleTooSmall { n, k });
            }
            let scale = match form {
                AiccForm::Standard => 2.0,
                AiccForm::Paper => 1.0,
            };
            Ok(aic + scale * kf * (kf + 1.0) / (n - k - 1) as f64)
        }
    }
}

/// The five named exponential smoothing pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtsPoolName {
    All,
    NoMultTrend,
    Damped,
    MatchErrorSeasonal,
    Reduced,
}

impl EtsPoolName {
    pub const ALL: [EtsPoolName; 5] = [
        EtsPoolName::All,
        EtsPoolName::NoMultTrend,
        EtsPoolName::Damped,
        EtsPoolName::MatchErrorSeasonal,
        EtsPoolName::Reduced,
    ];

    /// Label used on the command line (`ets:<label>`).
    pub fn label(self) -> &'static str {
        match self {
            EtsPoolName::All => "all",
            EtsPoolName::NoMultTrend => "no_mult_trend",
            EtsPoolName::Damped => "damped",
            EtsPoolName::MatchErrorSeasonal => "match",
            EtsPoolName::Reduced => "reduced",
        }
    }

    fn admits(self, spec: &EtsModelSpec) -> bool {
        let no_mult_trend = !spec.trend.is_multiplicative();
        // Non-damped trended models are dropped; untrended ones stay.
        let damped = spec.trend == TrendType::None || spec.trend.is_damped();
        let matched =
            !(spec.error == ErrorType::Multiplicative && spec.seasonal == SeasonalType::Additive);
        match self {
            EtsPoolName::All => true,
            EtsPoolName::NoMultTrend => no_mult_trend,
            EtsPoolName::Damped => damped,
            EtsPoolName::MatchErrorSeasonal => matched,
            EtsPoolName::Reduced => no_mult_trend && damped && matched,
        }
    }
}

impl FromStr for EtsPoolName {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(EtsPoolName::All),
            "no_mult_trend" => Ok(EtsPoolName::NoMultTrend),
            "damped" => Ok(EtsPoolName::Damped),
            "match" | "match_error_seasonal" => Ok(EtsPoolName::MatchErrorSeasonal),
            "reduced" => Ok(EtsPoolName::Reduced),
            _ => Err(PoolError::UnknownPool(s.to_string())),
        }
    }
}

/// Models of a named pool in canonical order; seasonal models are dropped
/// when `seasonal` is false.
pub fn ets_pool(name: EtsPoolName, seasonal: bool) -> Vec<EtsModelSpec> {
    EtsModelSpec::applicable()
        .into_iter()
        .filter(|s| name.admits(s))
        .filter(|s| seasonal || !s.is_seasonal())
        .collect()
}

/// A pool of candidate models from one family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelPool {
    /// Named ETS pool; seasonal members are removed for non-seasonal series at
    /// selection time.
    Ets(EtsPoolName),
    /// Custom ETS pool.
    EtsCustom(Vec<EtsModelSpec>),
    /// Exhaustive ARIMA search with `p+q+P+Q <= K`.
    ArimaMaxOrder(usize),
    /// Stepwise ARIMA search.
    ArimaStepwise,
}

impl ModelPool {
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn is_ets(&self) -> bool {
        matches!(self, ModelPool::Ets(_) | ModelPool::EtsCustom(_))
    }

    /// ETS candidates for a series that is (or is not) seasonal.
    pub fn ets_specs(&self, seasonal: bool) -> Option<Vec<EtsModelSpec>> {
        match self {
            ModelPool::Ets(name) => Some(ets_pool(*name, seasonal)),
            ModelPool::EtsCustom(specs) => {
                let mut v: Vec<EtsModelSpec> = specs
                    .iter()
                    .copied()
                    .filter(|s| seasonal || !s.is_seasonal())
                    .collect();
                v.sort();
                v.dedup();
                Some(v)
            }
            _ => None,
        }
    }

    /// Number of candidate structures, used to order pools by complexity.
    pub fn size(&self, seasonal: bool) -> usize {
        match self {
            ModelPool::ArimaMaxOrder(k) => crate::arima::count_order_tuples(*k, seasonal),
            ModelPool::ArimaStepwise => usize::MAX,
            other => other.ets_specs(seasonal).map_or(0, |v| v.len()),
        }
    }
}

impl fmt::Display for ModelPool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelPool::Ets(name) => write!(f, "ets:{}", name.label()),
            ModelPool::EtsCustom(specs) => {
                let names: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
                write!(f, "ets:{{{}}}", names.join(","))
            }
            ModelPool::ArimaMaxOrder(k) => write!(f, "arima:K{k}"),
            ModelPool::ArimaStepwise => f.write_str("arima:stepwise"),
        }
    }
}

impl FromStr for ModelPool {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || PoolError::UnknownPool(s.to_string());
        let (family, rest) = s.split_once(':').ok_or_else(unknown)?;
        match family {
            "ets" => {
                if let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                    let specs = inner
                        .split(',')
                        .map(|t| t.trim().parse::<EtsModelSpec>().map_err(|_| unknown()))
                        .collect::<Result<Vec<_>, _>>()?;
                    if specs.is_empty() || specs.iter().any(|s| !s.is_applicable()) {
                        return Err(unknown());
                    }
                    Ok(ModelPool::EtsCustom(specs))
                } else {
                    Ok(ModelPool::Ets(rest.parse().map_err(|_| unknown())?))
                }
            }
            "arima" => {
                if rest == "stepwise" {
                    return Ok(ModelPool::ArimaStepwise);
                }
                let k: usize = rest
                    .strip_prefix('K')
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(unknown)?;
                if !(1..=8).contains(&k) {
                    return Err(unknown());
                }
                Ok(ModelPool::ArimaMaxOrder(k))
            }
            _ => Err(unknown()),
        }
    }
}

/// Broad forecast profile of an ETS model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    LevelOnly,
    TrendOnly,
    SeasonalOnly,
    TrendAndSeasonal,
}

impl ProfileClass {
    pub const ALL: [ProfileClass; 4] = [
        ProfileClass::LevelOnly,
        ProfileClass::TrendOnly,
        ProfileClass::SeasonalOnly,
        ProfileClass::TrendAndSeasonal,
    ];
}

pub fn profile_class(spec: &EtsModelSpec) -> ProfileClass {
    match (spec.has_trend(), spec.is_seasonal()) {
        (false, false) => ProfileClass::LevelOnly,
        (true, false) => ProfileClass::TrendOnly,
        (false, true) => ProfileClass::SeasonalOnly,
        (true, true) => ProfileClass::TrendAndSeasonal,
    }
}

/// Every subset of a model set that keeps at least one model per profile
/// class. Pools are bitmasks over [`BalancedPools::models`] (bit `i` is model
/// `i` in canonical order) and are yielded in increasing mask order.
#[derive(Debug, Clone)]
pub struct BalancedPools {
    models: Vec<EtsModelSpec>,
    class_masks: Vec<u32>,
    next: u64,
    end: u64,
    total: u64,
}

impl BalancedPools {
    pub fn models(&self) -> &[EtsModelSpec] {
        &self.models
    }

    /// Closed-form count: product over classes of `2^|class| - 1`.
    pub fn total(&self) -> u64 {
        self.total
    }

    fn is_balanced(&self, mask: u32) -> bool {
        self.class_masks.iter().all(|c| mask & c != 0)
    }

    /// Expand a mask into its models.
    pub fn members(&self, mask: u32) -> Vec<EtsModelSpec> {
        self.models
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| *s)
            .collect()
    }

    /// Mask of a given set of models, if all of them belong to this enumeration.
    pub fn mask_of(&self, specs: &[EtsModelSpec]) -> Option<u32> {
        specs.iter().try_fold(0u32, |acc, s| {
            self.models
                .iter()
                .position(|m| m == s)
                .map(|i| acc | (1 << i))
        })
    }
}

impl Iterator for BalancedPools {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        while self.next < self.end {
            let mask = self.next as u32;
            self.next += 1;
            if self.is_balanced(mask) {
                return Some(mask);
            }
        }
        None
    }
}

/// Enumerate balanced pools over `models`. When `seasonal` is false, seasonal
/// models are dropped and only the level and trend classes are required.
pub fn enumerate_balanced_pools(
    models: &[EtsModelSpec],
    seasonal: bool,
) -> Result<BalancedPools, PoolError> {
    let mut models: Vec<EtsModelSpec> = models
        .iter()
        .copied()
        .filter(|s| seasonal || !s.is_seasonal())
        .collect();
    models.sort();
    models.dedup();
    if models.len() > 31 {
        return Err(PoolError::TooManyModels(models.len()));
    }
    let classes: &[ProfileClass] = if seasonal {
        &ProfileClass::ALL
    } else {
        &ProfileClass::ALL[..2]
    };
    let mut class_masks = Vec::with_capacity(classes.len());
    let mut total = 1u64;
    for &class in classes {
        let mut mask = 0u32;
        for (i, s) in models.iter().enumerate() {
            if profile_class(s) == class {
                mask |= 1 << i;
            }
        }
        if mask == 0 {
            return Err(PoolError::EmptyProfileClass(class));
        }
        total *= (1u64 << mask.count_ones()) - 1;
        class_masks.push(mask);
    }
    Ok(BalancedPools {
        end: 1u64 << models.len(),
        models,
        class_masks,
        next: 1,
        total,
    })
}
