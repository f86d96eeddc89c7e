//! Run configuration, loaded from a single JSON document.

use serde::{Deserialize, Serialize};

use crate::citegraph::{TiePolicy, YearWindow};
use crate::indicators::{CiCounting, DomesticCounting, DomesticMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Top fraction of every (category, year) cell treated as elite.
    pub elite_fraction: f64,
    pub tie_policy: TiePolicy,
    /// Years of citing articles whose references count toward citedness.
    pub citation_window: YearWindow,
    /// Years between a reference year and the publication year it is compared with.
    pub lag_years: u32,
    pub ci_level: f64,
    pub ci_counting: CiCounting,
    pub moving_average_window: usize,
    pub domestic_mode: DomesticMode,
    pub domestic_counting: DomesticCounting,
    /// Countries above this publication share (percent) get ratio and
    /// domestic indicators.
    pub min_pub_share_pct: f64,
    pub exclude_self_references: bool,
    /// Inclusive validity window for publication years at ingestion.
    pub year_window: (i32, i32),
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            elite_fraction: 0.01,
            tie_policy: TiePolicy::IncludeTies,
            citation_window: YearWindow::OPEN,
            lag_years: 3,
            ci_level: 0.95,
            ci_counting: CiCounting::Full,
            moving_average_window: 3,
            domestic_mode: DomesticMode::AllElite,
            domestic_counting: DomesticCounting::Full,
            min_pub_share_pct: 1.0,
            exclude_self_references: false,
            year_window: crate::corpus::DEFAULT_YEAR_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid config at `{path}`: {message}")]
pub struct ConfigError {
    /// Dotted key path of the offending value.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(ConfigError::at("elite_fraction", "must lie in (0, 1]"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(ConfigError::at("ci_level", "must lie in (0, 1)"));
        }
        if self.moving_average_window < 1 {
            return Err(ConfigError::at("moving_average_window", "must be at least 1"));
        }
        if !self.min_pub_share_pct.is_finite() || self.min_pub_share_pct < 0.0 {
            return Err(ConfigError::at("min_pub_share_pct", "must be a non-negative number"));
        }
        if let (Some(from), Some(to)) = (self.citation_window.from, self.citation_window.to) {
            if from > to {
                return Err(ConfigError::at("citation_window", "`from` is after `to`"));
            }
        }
        if self.year_window.0 > self.year_window.1 {
            return Err(ConfigError::at("year_window", "start is after end"));
        }
        Ok(())
    }

    /// Parses and validates a JSON document. Missing keys take defaults;
    /// unknown keys are errors.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError { path, message: e.into_inner().to_string() }
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON used for hashing and echoing.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn reads_enums_by_kebab_name() {
        let c = RunConfig::from_json(
            r#"{"tie_policy":"strict-rank","domestic_mode":"purely-domestic-elite","ci_counting":"fractional","lag_years":0}"#,
        )
        .unwrap();
        assert_eq!(c.tie_policy, TiePolicy::StrictRank);
        assert_eq!(c.domestic_mode, DomesticMode::PurelyDomesticElite);
        assert_eq!(c.ci_counting, CiCounting::Fractional);
        assert_eq!(c.lag_years, 0);
    }

    #[test]
    fn reports_key_paths() {
        let e = RunConfig::from_json(r#"{"citation_window":{"from":"x"}}"#).unwrap_err();
        assert_eq!(e.path, "citation_window.from");
        let e = RunConfig::from_json(r#"{"elite_fraction":1.5}"#).unwrap_err();
        assert_eq!(e.path, "elite_fraction");
        let e = RunConfig::from_json(r#"{"moving_average_window":0}"#).unwrap_err();
        assert_eq!(e.path, "moving_average_window");
        let e = RunConfig::from_json(r#"{"lag_years":-1}"#).unwrap_err();
        assert_eq!(e.path, "lag_years");
        let e = RunConfig::from_json(r#"{"bogus":1}"#).unwrap_err();
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn canonical_json_round_trips() {
        let c = RunConfig { elite_fraction: 0.05, ..RunConfig::default() };
        assert_eq!(RunConfig::from_json(&c.to_canonical_json()).unwrap(), c);
    }
}
