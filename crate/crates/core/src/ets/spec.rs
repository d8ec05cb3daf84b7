use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Error component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorType {
    Additive,
    Multiplicative,
}

/// Trend component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrendType {
    None,
    Additive,
    AdditiveDamped,
    Multiplicative,
    MultiplicativeDamped,
}

/// Seasonal component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SeasonalType {
    None,
    Additive,
    Multiplicative,
}

impl TrendType {
    pub const ALL: [TrendType; 5] = [
        TrendType::None,
        TrendType::Additive,
        TrendType::AdditiveDamped,
        TrendType::Multiplicative,
        TrendType::MultiplicativeDamped,
    ];

    pub fn is_damped(self) -> bool {
        matches!(
            self,
            TrendType::AdditiveDamped | TrendType::MultiplicativeDamped
        )
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            TrendType::Multiplicative | TrendType::MultiplicativeDamped
        )
    }

    pub fn is_additive(self) -> bool {
        matches!(self, TrendType::Additive | TrendType::AdditiveDamped)
    }

    fn code(self) -> &'static str {
        match self {
            TrendType::None => "N",
            TrendType::Additive => "A",
            TrendType::AdditiveDamped => "Ad",
            TrendType::Multiplicative => "M",
            TrendType::MultiplicativeDamped => "Md",
        }
    }
}

/// Structural description of one exponential smoothing model.
///
/// The derived ordering is the canonical one: additive-error block first,
/// then trend rows (N, A, Ad, M, Md), then seasonal columns (N, A, M).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EtsModelSpec {
    pub error: ErrorType,
    pub trend: TrendType,
    pub seasonal: SeasonalType,
}

impl EtsModelSpec {
    pub const fn new(error: ErrorType, trend: TrendType, seasonal: SeasonalType) -> Self {
        EtsModelSpec {
            error,
            trend,
            seasonal,
        }
    }

    /// All 30 combinations in canonical order.
    pub fn all_combinations() -> Vec<EtsModelSpec> {
        let mut out = Vec::with_capacity(30);
        for error in [ErrorType::Additive, ErrorType::Multiplicative] {
            for trend in TrendType::ALL {
                for seasonal in [
                    SeasonalType::None,
                    SeasonalType::Additive,
                    SeasonalType::Multiplicative,
                ] {
                    out.push(EtsModelSpec::new(error, trend, seasonal));
                }
            }
        }
        out
    }

    /// The 19 models that avoid infinite forecast variance, in canonical order.
    pub fn applicable() -> Vec<EtsModelSpec> {
        Self::all_combinations()
            .into_iter()
            .filter(|s| s.is_applicable())
            .collect()
    }

    /// False for additive error combined with any multiplicative component,
    /// and for multiplicative trend with additive seasonality.
    pub fn is_applicable(&self) -> bool {
        match self.error {
            ErrorType::Additive => {
                !self.trend.is_multiplicative() && self.seasonal != SeasonalType::Multiplicative
            }
            ErrorType::Multiplicative => {
                !(self.trend.is_multiplicative() && self.seasonal == SeasonalType::Additive)
            }
        }
    }

    pub fn has_trend(&self) -> bool {
        self.trend != TrendType::None
    }

    pub fn is_seasonal(&self) -> bool {
        self.seasonal != SeasonalType::None
    }

    /// Any component that requires strictly positive data.
    pub fn needs_positive_data(&self) -> bool {
        self.error == ErrorType::Multiplicative
            || self.trend.is_multiplicative()
            || self.seasonal == SeasonalType::Multiplicative
    }

    /// The four models whose intervals come from simulated sample paths.
    pub fn needs_simulation(&self) -> bool {
        self.trend.is_multiplicative()
    }

    /// Number of smoothing and damping parameters.
    pub fn n_smoothing_params(&self) -> usize {
        1 + usize::from(self.has_trend())
            + usize::from(self.is_seasonal())
            + usize::from(self.trend.is_damped())
    }

    /// Parameter count `k` for period `m`: smoothing and damping parameters,
    /// free initial states (one seasonal state is pinned by normalisation)
    /// and the innovation variance.
    pub fn n_params(&self, period: usize) -> usize {
        let states =
            1 + usize::from(self.has_trend()) + if self.is_seasonal() { period - 1 } else { 0 };
        self.n_smoothing_params() + states + 1
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EtsModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = match self.error {
            ErrorType::Additive => "A",
            ErrorType::Multiplicative => "M",
        };
        let s = match self.seasonal {
            SeasonalType::None => "N",
            SeasonalType::Additive => "A",
            SeasonalType::Multiplicative => "M",
        };
        write!(f, "{e}{}{s}", self.trend.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid ETS descriptor '{0}'")]
pub struct ParseSpecError(pub String);

impl FromStr for EtsModelSpec {
    type Err = ParseSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseSpecError(s.to_string());
        let chars: Vec<char> = s.chars().collect();
        if chars.len() < 3 || chars.len() > 4 {
            return Err(bad());
        }
        let error = match chars[0] {
            'A' => ErrorType::Additive,
            'M' => ErrorType::Multiplicative,
            _ => return Err(bad()),
        };
        let seasonal = match chars[chars.len() - 1] {
            'N' => SeasonalType::None,
            'A' => SeasonalType::Additive,
            'M' => SeasonalType::Multiplicative,
            _ => return Err(bad()),
        };
        let trend_code: String = chars[1..chars.len() - 1].iter().collect();
        let trend = match trend_code.as_str() {
            "N" => TrendType::None,
            "A" => TrendType::Additive,
            "Ad" => TrendType::AdditiveDamped,
            "M" => TrendType::Multiplicative,
            "Md" => TrendType::MultiplicativeDamped,
            _ => return Err(bad()),
        };
        Ok(EtsModelSpec::new(error, trend, seasonal))
    }
}

impl Serialize for EtsModelSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EtsModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nineteen_applicable_models() {
        let names: Vec<String> = EtsModelSpec::applicable()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            names,
            [
                "ANN", "ANA", "AAN", "AAA", "AAdN", "AAdA", "MNN", "MNA", "MNM", "MAN", "MAA",
                "MAM", "MAdN", "MAdA", "MAdM", "MMN", "MMM", "MMdN", "MMdM"
            ]
        );
    }

    #[test]
    fn descriptors_round_trip() {
        for spec in EtsModelSpec::all_combinations() {
            assert_eq!(spec.to_string().parse::<EtsModelSpec>().unwrap(), spec);
        }
        assert!("AXN".parse::<EtsModelSpec>().is_err());
        assert!("AN".parse::<EtsModelSpec>().is_err());
    }

    #[test]
    fn parameter_counts() {
        let ann: EtsModelSpec = "ANN".parse().unwrap();
        assert_eq!(ann.n_params(1), 3);
        let aada: EtsModelSpec = "AAdA".parse().unwrap();
        assert_eq!(aada.n_params(4), 10);
        let mmdm: EtsModelSpec = "MMdM".parse().unwrap();
        assert_eq!(mmdm.n_params(12), 4 + 2 + 11 + 1);
    }

    #[test]
    fn simulation_models() {
        let sim: Vec<String> = EtsModelSpec::applicable()
            .into_iter()
            .filter(EtsModelSpec::needs_simulation)
            .map(|s| s.to_string())
            .collect();
        assert_eq!(sim, ["MMN", "MMM", "MMdN", "MMdM"]);
    }
}
