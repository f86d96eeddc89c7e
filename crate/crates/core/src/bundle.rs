//! The full set of indicator tables produced by one run.
//!
//! Both the optimized pipeline and the brute-force oracle emit this type, so
//! the two can be diffed field by field.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::citegraph::CellKey;
use crate::country::CountryCode;
use crate::indicators::{AggregateRatio, ConfidenceInterval, PerformerClass};
use crate::refgeo::{RemovalStats, ShareRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteRow {
    pub id: String,
    pub cells: Vec<CellKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub cell: CellKey,
    pub size: usize,
    pub quota: usize,
    pub threshold: u32,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub country: CountryCode,
    pub year: i32,
    pub share_pct: f64,
    pub ci: ConfidenceInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub country: CountryCode,
    pub year: i32,
    pub pub_year: i32,
    pub ref_share_pct: f64,
    pub pub_share_pct: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub country: CountryCode,
    pub mean: f64,
    pub rank_mean: usize,
    pub sd: Option<f64>,
    pub rank_sd: usize,
    pub delta: f64,
    pub rank_delta: usize,
    pub class: PerformerClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomesticRow {
    pub country: CountryCode,
    pub year: i32,
    pub pub_year: i32,
    pub qualifying_refs: u64,
    pub domestic_refs: u64,
    pub domestic_share: f64,
    pub pub_share: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothedSeries {
    Lagged,
    Domestic,
}

impl SmoothedSeries {
    pub fn as_str(self) -> &'static str {
        match self {
            SmoothedSeries::Lagged => "lagged",
            SmoothedSeries::Domestic => "domestic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedRow {
    pub series: SmoothedSeries,
    pub country: CountryCode,
    pub year: i32,
    pub value: f64,
    pub moving_average: f64,
}

/// Every table of a run. Row orders are part of the contract:
///
/// * `elite`: id ascending; `thresholds`: cell ascending.
/// * `article_shares`, `reference_shares`: share descending, then code.
/// * `focus_countries`, `aggregate_ratios`: publication share descending.
/// * `yearly_shares`, `ratios`, `domestic`: (country, year) ascending.
/// * `summary`: mean rank ascending.
/// * `smoothed`: (series, country, year) ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorBundle {
    pub elite: Vec<EliteRow>,
    pub thresholds: Vec<ThresholdRow>,
    pub removal: RemovalStats,
    pub article_shares: Vec<ShareRow>,
    pub reference_shares: Vec<ShareRow>,
    pub focus_countries: Vec<CountryCode>,
    pub yearly_shares: Vec<SeriesRow>,
    pub ratios: Vec<RatioRow>,
    pub ratios_omitted: u64,
    pub aggregate_ratios: Vec<AggregateRatio>,
    pub summary: Vec<SummaryRow>,
    pub domestic: Vec<DomesticRow>,
    pub domestic_omitted: u64,
    pub smoothed: Vec<SmoothedRow>,
}

/// Rounds half away from zero to two decimals, for display.
///
/// The value is first snapped to nine decimals (the precision of the exact
/// outputs), so a display value always agrees with its printed exact value and
/// one-ulp noise around a tie cannot flip the result.
pub fn round2(x: f64) -> f64 {
    if !x.is_finite() || x.abs() >= 1e12 {
        return (x * 100.0).round() / 100.0;
    }
    let nanos = (x * 1e9).round() as i128;
    let hundredths = (nanos.abs() + 5_000_000) / 10_000_000;
    let hundredths = if nanos < 0 { -hundredths } else { hundredths };
    hundredths as f64 / 100.0
}

impl IndicatorBundle {
    /// Field-by-field differences. Numbers match when within `tolerance`
    /// (absolute, or relative for magnitudes above 1); everything else must be
    /// equal. Returns one message per mismatch, prefixed with its JSON path.
    pub fn diff(&self, other: &IndicatorBundle, tolerance: f64) -> Vec<String> {
        let a = serde_json::to_value(self).expect("bundle serializes");
        let b = serde_json::to_value(other).expect("bundle serializes");
        let mut out = Vec::new();
        diff_values("$", &a, &b, &mut |x, y| {
            let scale = x.abs().max(y.abs()).max(1.0);
            (x - y).abs() <= tolerance * scale
        }, &mut out);
        out
    }

    /// Differences after two-decimal display rounding.
    pub fn display_diff(&self, other: &IndicatorBundle) -> Vec<String> {
        let a = serde_json::to_value(self).expect("bundle serializes");
        let b = serde_json::to_value(other).expect("bundle serializes");
        let mut out = Vec::new();
        diff_values("$", &a, &b, &mut |x, y| round2(x) == round2(y), &mut out);
        out
    }
}

fn diff_values(
    path: &str,
    a: &Value,
    b: &Value,
    numbers_match: &mut dyn FnMut(f64, f64) -> bool,
    out: &mut Vec<String>,
) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !numbers_match(x, y) {
                out.push(format!("{path}: {x} != {y}"));
            }
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                out.push(format!("{path}: length {} != {}", xs.len(), ys.len()));
                return;
            }
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                diff_values(&format!("{path}[{i}]"), x, y, numbers_match, out);
            }
        }
        (Value::Object(xs), Value::Object(ys)) => {
            for (k, x) in xs {
                match ys.get(k) {
                    Some(y) => diff_values(&format!("{path}.{k}"), x, y, numbers_match, out),
                    None => out.push(format!("{path}.{k}: missing on the right")),
                }
            }
            for k in ys.keys().filter(|k| !xs.contains_key(*k)) {
                out.push(format!("{path}.{k}: missing on the left"));
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} != {b}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round2_half_away_from_zero() {
        assert_eq!(round2(2.345), 2.35);
        assert_eq!(round2(-0.125), -0.13);
        assert_eq!(round2(66.666_666), 66.67);
        assert_eq!(round2(1.8049999999999997), round2(1.8050000000000002));
        assert_eq!(round2(1.8049999999999997), 1.81);
        assert_eq!(round2(1.00499999), 1.0);
    }

    #[test]
    fn diff_reports_paths() {
        let a = IndicatorBundle {
            ratios_omitted: 3,
            focus_countries: vec![CountryCode::new("US").unwrap()],
            ..IndicatorBundle::default()
        };
        let mut b = a.clone();
        assert!(a.diff(&b, 1e-9).is_empty());
        b.ratios_omitted = 4;
        b.focus_countries.push(CountryCode::new("CN").unwrap());
        let d = a.diff(&b, 1e-9);
        assert_eq!(d.len(), 2, "{d:?}");
        assert!(d.iter().any(|m| m.starts_with("$.ratios_omitted")));
    }

    #[test]
    fn diff_tolerance_is_relative_for_large_values() {
        let mut a = IndicatorBundle::default();
        a.removal.removal_pct = 1e6;
        let mut b = a.clone();
        b.removal.removal_pct = 1e6 + 1e-4;
        assert!(a.diff(&b, 1e-9).is_empty());
        b.removal.removal_pct = 1e6 + 1e-2;
        assert_eq!(a.diff(&b, 1e-9).len(), 1);
    }
}
