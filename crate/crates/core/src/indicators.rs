//! Time-series indicators over cleaned references and publication shares.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::Corpus;
use crate::country::CountryCode;
use crate::refgeo::{CountryTally, RefInstance};

/// Mean lagged ratio at or above which a country is a high performer.
pub const HIGH_PERFORMER_MIN: f64 = 1.2;
/// Mean lagged ratio at or above which a country is at least average.
pub const AVERAGE_PERFORMER_MIN: f64 = 0.8;

// ---------------------------------------------------------------------------
// Share series

/// Per-year fractional tallies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShareSeries {
    years: BTreeMap<i32, CountryTally>,
}

impl ShareSeries {
    pub fn from_tallies(years: BTreeMap<i32, CountryTally>) -> Self {
        Self { years }
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.years.keys().copied()
    }

    pub fn tally(&self, year: i32) -> Option<&CountryTally> {
        self.years.get(&year)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &CountryTally)> {
        self.years.iter().map(|(y, t)| (*y, t))
    }

    /// Fractional share in percent; `None` when the year is absent.
    pub fn share(&self, country: CountryCode, year: i32) -> Option<f64> {
        self.years.get(&year).map(|t| t.fractional_share(country))
    }

    /// Whole-period tally.
    pub fn total(&self) -> CountryTally {
        let mut total = CountryTally::new();
        for tally in self.years.values() {
            total.merge(tally);
        }
        total
    }
}

/// Reference shares keyed by the citing article's year. Years without
/// references are absent.
pub fn yearly_share_series(refs: &[RefInstance]) -> ShareSeries {
    let mut years: BTreeMap<i32, CountryTally> = BTreeMap::new();
    for r in refs {
        years
            .entry(r.citing_year)
            .or_default()
            .add(&r.cited_countries)
            .expect("cleaned references always carry countries");
    }
    ShareSeries { years }
}

/// Publication shares over every document-type `article` that lists at least
/// one country, keyed by publication year.
pub fn publication_share_series(corpus: &Corpus) -> ShareSeries {
    let mut years: BTreeMap<i32, CountryTally> = BTreeMap::new();
    for article in corpus.articles() {
        if article.is_article() && !article.countries.is_empty() {
            years
                .entry(article.publication_year)
                .or_default()
                .add(&article.countries)
                .expect("non-empty");
        }
    }
    ShareSeries { years }
}

// ---------------------------------------------------------------------------
// Confidence intervals

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CiError {
    #[error("sample size must be positive")]
    EmptySample,
    #[error("successes ({successes}) exceed sample size ({n})")]
    TooManySuccesses { successes: f64, n: f64 },
    #[error("confidence level must lie in (0, 1), got {0}")]
    Level(f64),
}

/// Two-sided standard normal critical value for `level`.
pub fn normal_critical_value(level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn proportion_ci(successes: u64, n: u64, level: f64) -> Result<ConfidenceInterval, CiError> {
    wilson_interval(successes as f64, n as f64, level)
}

/// Wilson score interval with real-valued counts, for fractional tallies.
pub fn wilson_interval(successes: f64, n: f64, level: f64) -> Result<ConfidenceInterval, CiError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CiError::Level(level));
    }
    if n.is_nan() || n <= 0.0 {
        return Err(CiError::EmptySample);
    }
    if successes > n || successes < 0.0 {
        return Err(CiError::TooManySuccesses { successes, n });
    }
    let p = successes / n;
    let z = normal_critical_value(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(ConfidenceInterval {
        point: p,
        lower: (centre - half).clamp(0.0, p),
        upper: (centre + half).clamp(p, 1.0),
        level,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiCounting {
    /// Trials are (reference, country) pairs.
    #[default]
    Full,
    /// Trials are references; successes are fractional counts.
    Fractional,
}

/// Interval around a country's share within one tally.
pub fn share_ci(
    tally: &CountryTally,
    country: CountryCode,
    level: f64,
    counting: CiCounting,
) -> Result<ConfidenceInterval, CiError> {
    match counting {
        CiCounting::Full => proportion_ci(tally.full_count(country), tally.full_total(), level),
        CiCounting::Fractional => {
            wilson_interval(tally.fractional_count(country), tally.items() as f64, level)
        }
    }
}

// ---------------------------------------------------------------------------
// Lagged ratios

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaggedRatio {
    pub pub_year: i32,
    /// Percent.
    pub ref_share: f64,
    /// Percent.
    pub pub_share: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub series: BTreeMap<CountryCode, BTreeMap<i32, LaggedRatio>>,
    /// (country, year) pairs skipped for lack of a publication share.
    pub omitted: u64,
}

impl RatioSeries {
    pub fn ratios(&self) -> BTreeMap<CountryCode, BTreeMap<i32, f64>> {
        self.series
            .iter()
            .map(|(c, years)| (*c, years.iter().map(|(y, p)| (*y, p.ratio)).collect()))
            .collect()
    }
}

/// `ref_share(c, t) / pub_share(c, t - lag)` for each listed country and each
/// reference year. A country absent from a reference year has share 0 there.
pub fn lagged_ratio_series(
    ref_shares: &ShareSeries,
    pub_shares: &ShareSeries,
    lag: u32,
    countries: &[CountryCode],
) -> RatioSeries {
    let mut out = RatioSeries::default();
    for &country in countries {
        let mut years = BTreeMap::new();
        for (year, tally) in ref_shares.iter() {
            let pub_year = year - lag as i32;
            match pub_shares.share(country, pub_year) {
                Some(pub_share) if pub_share > 0.0 => {
                    let ref_share = tally.fractional_share(country);
                    years.insert(year, LaggedRatio { pub_year, ref_share, pub_share, ratio: ref_share / pub_share });
                }
                _ => out.omitted += 1,
            }
        }
        if !years.is_empty() {
            out.series.insert(country, years);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRatio {
    pub country: CountryCode,
    pub ref_share: f64,
    pub pub_share: f64,
    pub ratio: f64,
}

/// Whole-period share ratios, without lag. Countries with no publication
/// share are skipped.
pub fn aggregate_ratios(
    ref_tally: &CountryTally,
    pub_tally: &CountryTally,
    countries: &[CountryCode],
) -> Vec<AggregateRatio> {
    countries
        .iter()
        .filter_map(|&country| {
            let pub_share = pub_tally.fractional_share(country);
            (pub_share > 0.0).then(|| {
                let ref_share = ref_tally.fractional_share(country);
                AggregateRatio { country, ref_share, pub_share, ratio: ref_share / pub_share }
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Summaries

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerformerClass {
    High,
    Average,
    Low,
}

impl PerformerClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PerformerClass::High => "high",
            PerformerClass::Average => "average",
            PerformerClass::Low => "low",
        }
    }
}

impl fmt::Display for PerformerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compares the unrounded mean, so 1.1999 is average and 0.7999 is low.
pub fn classify_performers(mean: f64) -> PerformerClass {
    if mean >= HIGH_PERFORMER_MIN {
        PerformerClass::High
    } else if mean >= AVERAGE_PERFORMER_MIN {
        PerformerClass::Average
    } else {
        PerformerClass::Low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub mean: f64,
    /// Sample standard deviation; absent for single-year series.
    pub sd: Option<f64>,
    /// Last-year ratio minus first-year ratio.
    pub delta: f64,
    pub rank_mean: usize,
    pub rank_sd: usize,
    pub rank_delta: usize,
    pub class: PerformerClass,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub countries: BTreeMap<CountryCode, RatioSummary>,
}

impl RatioReport {
    /// Countries by mean rank.
    pub fn by_rank(&self) -> Vec<(CountryCode, &RatioSummary)> {
        let mut rows: Vec<_> = self.countries.iter().map(|(c, s)| (*c, s)).collect();
        rows.sort_by_key(|(_, s)| s.rank_mean);
        rows
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n − 1) standard deviation.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// 1-based ranks by descending value, absent values last, ties by country code.
fn descending_ranks(values: &[(CountryCode, Option<f64>)]) -> BTreeMap<CountryCode, usize> {
    let mut order: Vec<_> = values.to_vec();
    order.sort_by(|(ca, a), (cb, b)| {
        let by_value = match (a, b) {
            (Some(a), Some(b)) => b.total_cmp(a),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        by_value.then(ca.cmp(cb))
    });
    order.into_iter().enumerate().map(|(i, (c, _))| (c, i + 1)).collect()
}

/// Mean, sd, last-minus-first delta, their ranks, and the performer class.
/// Countries with an empty series are skipped.
pub fn ratio_summary(series: &BTreeMap<CountryCode, BTreeMap<i32, f64>>) -> RatioReport {
    let stats: Vec<(CountryCode, f64, Option<f64>, f64)> = series
        .iter()
        .filter(|(_, years)| !years.is_empty())
        .map(|(c, years)| {
            let values: Vec<f64> = years.values().copied().collect();
            let delta = values[values.len() - 1] - values[0];
            (*c, mean(&values), sample_sd(&values), delta)
        })
        .collect();
    let rank_mean = descending_ranks(&stats.iter().map(|s| (s.0, Some(s.1))).collect::<Vec<_>>());
    let rank_sd = descending_ranks(&stats.iter().map(|s| (s.0, s.2)).collect::<Vec<_>>());
    let rank_delta = descending_ranks(&stats.iter().map(|s| (s.0, Some(s.3))).collect::<Vec<_>>());
    let countries = stats
        .into_iter()
        .map(|(c, mean, sd, delta)| {
            let summary = RatioSummary {
                mean,
                sd,
                delta,
                rank_mean: rank_mean[&c],
                rank_sd: rank_sd[&c],
                rank_delta: rank_delta[&c],
                class: classify_performers(mean),
            };
            (c, summary)
        })
        .collect();
    RatioReport { countries }
}

/// Trailing mean over up to `window` most recent available years.
pub fn moving_average(series: &BTreeMap<i32, f64>, window: usize) -> BTreeMap<i32, f64> {
    let window = window.max(1);
    let values: Vec<f64> = series.values().copied().collect();
    series
        .keys()
        .enumerate()
        .map(|(i, &year)| {
            let start = (i + 1).saturating_sub(window);
            let slice = &values[start..=i];
            (year, slice.iter().sum::<f64>() / slice.len() as f64)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Domestic decomposition

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomesticMode {
    /// Every elite article listing the country.
    #[default]
    AllElite,
    /// Only elite articles whose sole country is this one.
    PurelyDomesticElite,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomesticCounting {
    /// A reference is domestic if the country is among its countries.
    #[default]
    Full,
    /// A domestic reference counts 1/n for n cited countries.
    Fractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomesticPoint {
    pub pub_year: i32,
    pub qualifying_refs: u64,
    pub domestic_refs: u64,
    /// Proportion of qualifying references that are domestic.
    pub domestic_share: f64,
    /// Proportion of world articles.
    pub pub_share: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomesticSeries {
    pub points: BTreeMap<i32, DomesticPoint>,
    /// Years skipped for lack of qualifying references or publication share.
    pub omitted: u64,
}

/// Indices into `refs` whose citing article qualifies for `country` under `mode`.
pub fn qualifying_refs(
    country: CountryCode,
    corpus: &Corpus,
    refs: &[RefInstance],
    mode: DomesticMode,
) -> Vec<usize> {
    refs.iter()
        .enumerate()
        .filter(|(_, r)| {
            let Some(citing) = corpus.get(&r.citing_id) else { return false };
            match mode {
                DomesticMode::AllElite => citing.countries.binary_search(&country).is_ok(),
                DomesticMode::PurelyDomesticElite => citing.countries == [country],
            }
        })
        .map(|(i, _)| i)
        .collect()
}

/// Domestic reference share in the country's elite articles at year t, over
/// its world publication share at t − lag.
pub fn domestic_ratio(
    country: CountryCode,
    corpus: &Corpus,
    refs: &[RefInstance],
    pub_shares: &ShareSeries,
    mode: DomesticMode,
    counting: DomesticCounting,
    lag: u32,
) -> DomesticSeries {
    // year -> (qualifying, domestic count, domestic weight)
    let mut per_year: BTreeMap<i32, (u64, u64, f64)> = refs.iter().map(|r| (r.citing_year, (0, 0, 0.0))).collect();
    for i in qualifying_refs(country, corpus, refs, mode) {
        let r = &refs[i];
        let entry = per_year.get_mut(&r.citing_year).expect("year seeded above");
        entry.0 += 1;
        if r.cited_countries.binary_search(&country).is_ok() {
            entry.1 += 1;
            entry.2 += match counting {
                DomesticCounting::Full => 1.0,
                DomesticCounting::Fractional => 1.0 / r.cited_countries.len() as f64,
            };
        }
    }
    let mut out = DomesticSeries::default();
    for (year, (qualifying, domestic, weight)) in per_year {
        let pub_year = year - lag as i32;
        let pub_share = pub_shares.share(country, pub_year).unwrap_or(0.0) / 100.0;
        if qualifying == 0 || pub_share <= 0.0 {
            out.omitted += 1;
            continue;
        }
        let domestic_share = weight / qualifying as f64;
        out.points.insert(
            year,
            DomesticPoint {
                pub_year,
                qualifying_refs: qualifying,
                domestic_refs: domestic,
                domestic_share,
                pub_share,
                ratio: domestic_share / pub_share,
            },
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ArticleRecord, DocumentType};

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn rf(citing: &str, year: i32, cited: &str, countries: &[&str]) -> RefInstance {
        let mut cited_countries: Vec<_> = countries.iter().map(|c| cc(c)).collect();
        cited_countries.sort();
        RefInstance {
            citing_id: citing.into(),
            citing_year: year,
            cited_id: cited.into(),
            cited_countries,
            cited_year: 2000,
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn one_year_one_country() {
        let s = yearly_share_series(&[rf("e", 2005, "a", &["US"]), rf("e", 2005, "b", &["US"])]);
        assert_eq!(s.share(cc("US"), 2005), Some(100.0));
        assert_eq!(s.share(cc("US"), 2006), None);
    }

    #[test]
    fn mixed_items_share() {
        let s = yearly_share_series(&[rf("e", 2005, "a", &["US"]), rf("e", 2005, "b", &["US", "CN"])]);
        assert_eq!(s.share(cc("US"), 2005), Some(75.0));
        assert_eq!(s.share(cc("CN"), 2005), Some(25.0));
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn wilson_matches_high_precision_evaluation() {
        // mpmath, 40 digits.
        let cases = [
            (50, 100, 0.95, 0.40383153036599564503, 0.59616846963400435497),
            (5, 10, 0.95, 0.23659309051256401458, 0.76340690948743598542),
            (50, 1000, 0.95, 0.038130262392748810124, 0.065313820244250800265),
            (3, 7, 0.90, 0.18644319036395598509, 0.71052290898640719051),
            (0, 100, 0.95, 0.0, 0.036993498206985670859),
            (100, 100, 0.95, 0.96300650179301432914, 1.0),
        ];
        for (s, n, level, lo, hi) in cases {
            let ci = proportion_ci(s, n, level).unwrap();
            assert!(close(ci.lower, lo, 1e-12), "{s}/{n}: {} vs {lo}", ci.lower);
            assert!(close(ci.upper, hi, 1e-12), "{s}/{n}: {} vs {hi}", ci.upper);
        }
    }

    #[test]
    fn wilson_degenerate_edges() {
        let zero = proportion_ci(0, 100, 0.95).unwrap();
        assert_eq!((zero.point, zero.lower), (0.0, 0.0));
        let all = proportion_ci(100, 100, 0.95).unwrap();
        assert_eq!((all.point, all.upper), (1.0, 1.0));
        assert_eq!(proportion_ci(0, 0, 0.95).unwrap_err(), CiError::EmptySample);
        assert!(proportion_ci(3, 2, 0.95).is_err());
        assert!(proportion_ci(1, 2, 1.0).is_err());
    }

    #[test]
    fn identical_shares_lag_zero_give_unit_ratios() {
        let refs = [rf("e", 2005, "a", &["US"]), rf("e", 2005, "b", &["US", "CN"]), rf("f", 2006, "c", &["CN"])];
        let series = yearly_share_series(&refs);
        let r = lagged_ratio_series(&series, &series, 0, &[cc("US"), cc("CN")]);
        assert_eq!(r.omitted, 1); // US has no 2006 publications.
        for years in r.series.values() {
            for p in years.values() {
                assert_eq!(p.ratio, 1.0);
            }
        }
    }

    #[test]
    fn lag_hand_division() {
        // Publication shares: 2001 US 50 / CN 50; 2002 US 80 / CN 20.
        let pubs = ShareSeries::from_tallies(BTreeMap::from([
            (2001, tally(&[&["US"], &["CN"]])),
            (2002, tally(&[&["US"], &["US"], &["US"], &["US"], &["CN"]])),
        ]));
        // Reference shares: 2004 US 75 / CN 25; 2005 US 100.
        let refs = ShareSeries::from_tallies(BTreeMap::from([
            (2004, tally(&[&["US"], &["US", "CN"]])),
            (2005, tally(&[&["US"]])),
            (2006, tally(&[&["US"]])),
        ]));
        let r = lagged_ratio_series(&refs, &pubs, 3, &[cc("US"), cc("CN")]);
        let us = &r.series[&cc("US")];
        assert!(close(us[&2004].ratio, 75.0 / 50.0, 1e-12));
        assert!(close(us[&2005].ratio, 100.0 / 80.0, 1e-12));
        let cn = &r.series[&cc("CN")];
        assert!(close(cn[&2004].ratio, 25.0 / 50.0, 1e-12));
        assert_eq!(cn[&2005].ratio, 0.0);
        assert_eq!(r.omitted, 2); // 2006 → 2003 missing for both.
    }

    fn tally(items: &[&[&str]]) -> CountryTally {
        let mut t = CountryTally::new();
        for item in items {
            let codes: Vec<_> = item.iter().map(|c| cc(c)).collect();
            t.add(&codes).unwrap();
        }
        t
    }

    #[test]
    fn aggregate_ratio_of_published_counts() {
        // Whole-period reference share 44.10 over publication share 24.02.
        let ratio: f64 = 44.10 / 24.02;
        assert_eq!(format!("{ratio:.2}"), "1.84");
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify_performers(1.2), PerformerClass::High);
        assert_eq!(classify_performers(1.1999), PerformerClass::Average);
        assert_eq!(classify_performers(0.8), PerformerClass::Average);
        assert_eq!(classify_performers(0.7999), PerformerClass::Low);
        assert_eq!(classify_performers(1.71), PerformerClass::High);
        assert_eq!(classify_performers(0.99), PerformerClass::Average);
        assert_eq!(classify_performers(0.50), PerformerClass::Low);
    }

    fn series_of(values: &[f64]) -> BTreeMap<i32, f64> {
        values.iter().enumerate().map(|(i, v)| (2004 + i as i32, *v)).collect()
    }

    #[test]
    fn constant_series_summary() {
        let report = ratio_summary(&BTreeMap::from([(cc("US"), series_of(&[1.0; 10]))]));
        let s = report.countries[&cc("US")];
        assert_eq!((s.mean, s.sd, s.delta), (1.0, Some(0.0), 0.0));
    }

    #[test]
    fn two_point_summary() {
        let report = ratio_summary(&BTreeMap::from([(cc("US"), series_of(&[0.5, 1.5]))]));
        let s = report.countries[&cc("US")];
        assert_eq!(s.mean, 1.0);
        assert!(close(s.sd.unwrap(), 0.5f64.sqrt(), 1e-15));
        assert_eq!(s.delta, 1.0);
    }

    #[test]
    fn single_year_has_no_sd_and_ranks_last() {
        let report = ratio_summary(&BTreeMap::from([
            (cc("AA"), series_of(&[2.0])),
            (cc("BB"), series_of(&[1.0, 1.1])),
        ]));
        assert_eq!(report.countries[&cc("AA")].sd, None);
        assert_eq!(report.countries[&cc("AA")].rank_sd, 2);
        assert_eq!(report.countries[&cc("BB")].rank_sd, 1);
        assert_eq!(report.countries[&cc("AA")].rank_mean, 1);
    }

    #[test]
    fn ranks_break_ties_by_code() {
        let report = ratio_summary(&BTreeMap::from([
            (cc("ZZ"), series_of(&[1.0, 1.0])),
            (cc("AA"), series_of(&[1.0, 1.0])),
        ]));
        assert_eq!(report.countries[&cc("AA")].rank_mean, 1);
        assert_eq!(report.countries[&cc("ZZ")].rank_mean, 2);
    }

    #[test]
    fn moving_average_examples() {
        let s = series_of(&[1.0, 2.0, 3.0]);
        assert_eq!(moving_average(&s, 3).into_values().collect::<Vec<_>>(), [1.0, 1.5, 2.0]);
        assert_eq!(moving_average(&s, 1), s);
        let flat = series_of(&[0.7; 6]);
        for w in 1..8 {
            assert!(moving_average(&flat, w).values().all(|v| close(*v, 0.7, 1e-15)));
        }
    }

    #[test]
    fn domestic_ratio_of_published_shares() {
        let ratio: f64 = 0.6671 / 0.2847;
        assert_eq!(format!("{ratio:.2}"), "2.34");
    }

    fn article(id: &str, year: i32, countries: &[&str]) -> ArticleRecord {
        let mut countries: Vec<_> = countries.iter().map(|c| cc(c)).collect();
        countries.sort();
        ArticleRecord {
            id: id.into(),
            publication_year: year,
            document_type: DocumentType::Article,
            subject_categories: vec!["C".into()],
            countries,
            references: vec![],
            match_key: None,
        }
    }

    #[test]
    fn domestic_six_ref_fixture() {
        let corpus = Corpus::from_records(vec![
            article("e1", 2005, &["US"]),
            article("e2", 2005, &["US", "DE"]),
            article("e3", 2005, &["DE"]),
        ])
        .unwrap();
        let refs = vec![
            rf("e1", 2005, "a", &["US"]),
            rf("e1", 2005, "b", &["US", "CN"]),
            rf("e1", 2005, "c", &["DE"]),
            rf("e2", 2005, "d", &["US"]),
            rf("e2", 2005, "e", &["US"]),
            rf("e2", 2005, "f", &["FR"]),
            rf("e3", 2005, "g", &["US"]),
        ];
        // Publication share of US in 2002: 1 of 4 articles.
        let pubs = ShareSeries::from_tallies(BTreeMap::from([(2002, tally(&[&["US"], &["DE"], &["DE"], &["CN"]]))]));
        let all = domestic_ratio(cc("US"), &corpus, &refs, &pubs, DomesticMode::AllElite, DomesticCounting::Full, 3);
        let p = all.points[&2005];
        assert_eq!((p.qualifying_refs, p.domestic_refs), (6, 4));
        assert!(close(p.domestic_share, 4.0 / 6.0, 1e-15));
        assert!(close(p.pub_share, 0.25, 1e-15));
        assert!(close(p.ratio, (4.0 / 6.0) / 0.25, 1e-12));

        let pure = domestic_ratio(cc("US"), &corpus, &refs, &pubs, DomesticMode::PurelyDomesticElite, DomesticCounting::Full, 3);
        let p = pure.points[&2005];
        assert_eq!((p.qualifying_refs, p.domestic_refs), (3, 2));

        let frac = domestic_ratio(cc("US"), &corpus, &refs, &pubs, DomesticMode::AllElite, DomesticCounting::Fractional, 3);
        assert!(close(frac.points[&2005].domestic_share, 3.5 / 6.0, 1e-15));
    }

    #[test]
    fn wholly_domestic_corpus_limit() {
        let corpus = Corpus::from_records(vec![article("e", 2005, &["US"])]).unwrap();
        let refs = vec![rf("e", 2005, "a", &["US"]), rf("e", 2005, "b", &["US"])];
        let pubs = ShareSeries::from_tallies(BTreeMap::from([(2005, tally(&[&["US"], &["CN"], &["CN"], &["CN"], &["CN"]]))]));
        let d = domestic_ratio(cc("US"), &corpus, &refs, &pubs, DomesticMode::AllElite, DomesticCounting::Full, 0);
        let p = d.points[&2005];
        assert_eq!(p.domestic_share, 1.0);
        assert!(close(p.ratio, 1.0 / 0.2, 1e-12));
    }

    #[test]
    fn domestic_omits_years_without_refs() {
        let corpus = Corpus::from_records(vec![article("e", 2005, &["US"]), article("f", 2006, &["CN"])]).unwrap();
        let refs = vec![rf("e", 2005, "a", &["US"]), rf("f", 2006, "b", &["US"])];
        let pubs = ShareSeries::from_tallies(BTreeMap::from([(2005, tally(&[&["US"]])), (2006, tally(&[&["US"]]))]));
        let d = domestic_ratio(cc("US"), &corpus, &refs, &pubs, DomesticMode::AllElite, DomesticCounting::Full, 0);
        assert_eq!(d.points.len(), 1);
        assert_eq!(d.omitted, 1);
    }
}
