//! Brute-force recomputation of every indicator.
//!
//! Nested loops, plain sorting, and float accumulation in item order, with
//! exact per-item fractions wherever an ordering or threshold is decided. Nothing
//! here calls into `citegraph`, `refgeo`, `indicators`, or `pipeline`; only the
//! bundle row types are shared so that results can be compared.

use std::collections::{BTreeMap, BTreeSet};

use statrs::function::erf::erf;

use crate::bundle::{
    DomesticRow, EliteRow, IndicatorBundle, RatioRow, SeriesRow, SmoothedRow, SmoothedSeries, SummaryRow,
    ThresholdRow,
};
use crate::citegraph::{CellKey, TiePolicy};
use crate::config::RunConfig;
use crate::corpus::{ArticleRecord, Corpus, DocumentType};
use crate::country::CountryCode;
use crate::indicators::{
    AggregateRatio, CiCounting, ConfidenceInterval, DomesticCounting, DomesticMode, PerformerClass,
};
use crate::refgeo::{RemovalStats, ShareRow};

/// Non-negative fraction kept in lowest terms.
#[derive(Clone, Copy, Debug)]
struct Fraction {
    num: u128,
    den: u128,
}

impl Fraction {
    const ZERO: Fraction = Fraction { num: 0, den: 1 };

    fn plus_unit_over(self, n: u128) -> Fraction {
        fn gcd(a: u128, b: u128) -> u128 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        let num = self.num * n + self.den;
        let den = self.den * n;
        let g = gcd(num, den);
        Fraction { num: num / g, den: den / g }
    }

    fn cmp(self, other: Fraction) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[derive(Default, Clone)]
struct NaiveTally {
    items: f64,
    fractional: BTreeMap<CountryCode, f64>,
    exact: BTreeMap<CountryCode, Fraction>,
    full: BTreeMap<CountryCode, u64>,
}

impl NaiveTally {
    fn add(&mut self, countries: &[CountryCode]) {
        let mut distinct: Vec<CountryCode> = Vec::new();
        for c in countries {
            if !distinct.contains(c) {
                distinct.push(*c);
            }
        }
        self.items += 1.0;
        for c in &distinct {
            *self.fractional.entry(*c).or_insert(0.0) += 1.0 / distinct.len() as f64;
            let exact = self.exact.entry(*c).or_insert(Fraction::ZERO);
            *exact = exact.plus_unit_over(distinct.len() as u128);
            *self.full.entry(*c).or_insert(0) += 1;
        }
    }

    fn share(&self, c: CountryCode) -> f64 {
        if self.items == 0.0 {
            return 0.0;
        }
        100.0 * self.fractional.get(&c).copied().unwrap_or(0.0) / self.items
    }

    fn rows(&self) -> Vec<ShareRow> {
        let mut rows: Vec<ShareRow> = self
            .fractional
            .iter()
            .map(|(c, f)| ShareRow {
                country: *c,
                full_count: self.full[c],
                fractional_count: *f,
                fractional_share_pct: 100.0 * f / self.items,
            })
            .collect();
        // Insertion sort: exact share descending, then code.
        for i in 1..rows.len() {
            let mut j = i;
            while j > 0 {
                let (a, b) = (&rows[j - 1], &rows[j]);
                let order = self.exact[&b.country].cmp(self.exact[&a.country]);
                let swap = order.is_gt() || (order.is_eq() && b.country < a.country);
                if !swap {
                    break;
                }
                rows.swap(j - 1, j);
                j -= 1;
            }
        }
        rows
    }
}

fn std_normal_quantile(p: f64) -> f64 {
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn wilson(successes: f64, n: f64, level: f64) -> ConfidenceInterval {
    let z = std_normal_quantile(1.0 - (1.0 - level) / 2.0);
    let p = successes / n;
    let a = p + z * z / (2.0 * n);
    let b = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    let d = 1.0 + z * z / n;
    let mut lower = (a - b) / d;
    let mut upper = (a + b) / d;
    if lower < 0.0 {
        lower = 0.0;
    }
    if lower > p {
        lower = p;
    }
    if upper > 1.0 {
        upper = 1.0;
    }
    if upper < p {
        upper = p;
    }
    ConfidenceInterval { point: p, lower, upper, level }
}

fn in_window(year: i32, config: &RunConfig) -> bool {
    let w = config.citation_window;
    (w.from.is_none() || year >= w.from.unwrap()) && (w.to.is_none() || year <= w.to.unwrap())
}

fn class_of(mean: f64) -> PerformerClass {
    if mean >= 1.2 {
        PerformerClass::High
    } else if mean >= 0.8 {
        PerformerClass::Average
    } else {
        PerformerClass::Low
    }
}

/// Ranks 1..n by descending value (absent last), ties by country code.
fn ranks(values: &[(CountryCode, Option<f64>)]) -> BTreeMap<CountryCode, usize> {
    let mut out = BTreeMap::new();
    for (c, v) in values {
        let mut rank = 1;
        for (d, w) in values {
            let ahead = match (v, w) {
                (Some(v), Some(w)) => w > v || (w == v && d < c),
                (None, Some(_)) => true,
                (Some(_), None) => false,
                (None, None) => d < c,
            };
            if ahead {
                rank += 1;
            }
        }
        out.insert(*c, rank);
    }
    out
}

fn trailing_means(values: &[(i32, f64)], window: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..values.len() {
        let mut sum = 0.0;
        let mut count = 0;
        let mut j = i as isize;
        while j >= 0 && count < window {
            sum += values[j as usize].1;
            count += 1;
            j -= 1;
        }
        out.push(sum / count as f64);
    }
    out
}

/// Recomputes the full indicator bundle from scratch.
pub fn oracle_indicators(corpus: &Corpus, config: &RunConfig) -> IndicatorBundle {
    let mut by_id: BTreeMap<&str, &ArticleRecord> = BTreeMap::new();
    for a in corpus.articles() {
        by_id.insert(a.id.as_str(), a);
    }

    // Inbound counts from distinct in-corpus targets of in-window citers.
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for a in corpus.articles() {
        if !in_window(a.publication_year, config) {
            continue;
        }
        let mut cited: BTreeSet<&str> = BTreeSet::new();
        for r in &a.references {
            if let Some(id) = r.resolved_id.as_deref() {
                if by_id.contains_key(id) {
                    cited.insert(id);
                }
            }
        }
        for id in cited {
            *counts.entry(id).or_insert(0) += 1;
        }
    }
    let count_of = |id: &str| counts.get(id).copied().unwrap_or(0);

    // Cells and elite selection.
    let mut cells: BTreeMap<(String, i32), Vec<&str>> = BTreeMap::new();
    for a in corpus.articles() {
        if a.document_type == DocumentType::Article {
            for cat in &a.subject_categories {
                cells.entry((cat.clone(), a.publication_year)).or_default().push(a.id.as_str());
            }
        }
    }
    let mut elite: BTreeMap<String, Vec<CellKey>> = BTreeMap::new();
    let mut thresholds = Vec::new();
    for ((cat, year), members) in &cells {
        let n = members.len();
        let mut ranked: Vec<(u32, &str)> = members.iter().map(|id| (count_of(id), *id)).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let target = config.elite_fraction * n as f64 * (1.0 - 1e-12);
        let mut k = 1;
        while (k as f64) < target {
            k += 1;
        }
        if k > n {
            k = n;
        }
        let kth = ranked[k - 1].0;
        let chosen: Vec<&str> = match config.tie_policy {
            TiePolicy::StrictRank => ranked[..k].iter().map(|r| r.1).collect(),
            TiePolicy::IncludeTies => ranked.iter().filter(|r| r.0 >= kth).map(|r| r.1).collect(),
        };
        for id in &chosen {
            elite.entry(id.to_string()).or_default().push(CellKey::new(cat.clone(), *year));
        }
        thresholds.push(ThresholdRow {
            cell: CellKey::new(cat.clone(), *year),
            size: n,
            quota: k,
            threshold: kth,
            selected: chosen.len(),
        });
    }

    // Reference extraction.
    struct Ref {
        citing: String,
        citing_year: i32,
        cited_countries: Vec<CountryCode>,
    }
    let mut refs: Vec<Ref> = Vec::new();
    let mut removal = RemovalStats::default();
    for citing_id in elite.keys() {
        let citing = by_id[citing_id.as_str()];
        let mut seen_ids: Vec<&str> = Vec::new();
        let mut seen_keys = Vec::new();
        let mut distinct_ids: Vec<&str> = Vec::new();
        let mut unresolved_keys = 0u64;
        for r in &citing.references {
            if let Some(id) = r.resolved_id.as_deref() {
                if seen_ids.contains(&id) {
                    removal.duplicates_collapsed += 1;
                } else {
                    seen_ids.push(id);
                    distinct_ids.push(id);
                }
            } else if let Some(key) = r.match_key.as_deref() {
                if seen_keys.contains(&key) {
                    removal.duplicates_collapsed += 1;
                } else {
                    seen_keys.push(key);
                    unresolved_keys += 1;
                }
            }
        }
        removal.total_before += distinct_ids.len() as u64 + unresolved_keys;
        removal.unresolved += unresolved_keys;
        distinct_ids.sort();
        for id in distinct_ids {
            let Some(cited) = by_id.get(id) else {
                removal.unresolved += 1;
                continue;
            };
            if cited.document_type != DocumentType::Article {
                removal.non_article += 1;
            } else if cited.countries.is_empty() {
                removal.no_country += 1;
            } else if cited.publication_year < 1980 {
                removal.pre_1980 += 1;
            } else if config.exclude_self_references && cited.id == citing.id {
                removal.self_reference += 1;
            } else {
                refs.push(Ref {
                    citing: citing.id.clone(),
                    citing_year: citing.publication_year,
                    cited_countries: cited.countries.clone(),
                });
            }
        }
    }
    removal.total_after = refs.len() as u64;
    let removed = removal.total_before - removal.total_after;
    removal.removal_pct =
        if removal.total_before > 0 { 100.0 * removed as f64 / removal.total_before as f64 } else { 0.0 };
    let typed = removal.non_article + removal.no_country + removal.pre_1980;
    let resolved = removal.total_before - removal.unresolved;
    removal.typed_removal_pct = if resolved > 0 { 100.0 * typed as f64 / resolved as f64 } else { 0.0 };

    // Tallies.
    let mut pub_total = NaiveTally::default();
    let mut pub_by_year: BTreeMap<i32, NaiveTally> = BTreeMap::new();
    for a in corpus.articles() {
        if a.document_type == DocumentType::Article && !a.countries.is_empty() {
            pub_total.add(&a.countries);
            pub_by_year.entry(a.publication_year).or_default().add(&a.countries);
        }
    }
    let mut ref_total = NaiveTally::default();
    let mut ref_by_year: BTreeMap<i32, NaiveTally> = BTreeMap::new();
    for r in &refs {
        ref_total.add(&r.cited_countries);
        ref_by_year.entry(r.citing_year).or_default().add(&r.cited_countries);
    }
    let article_shares = pub_total.rows();
    let focus: Vec<CountryCode> = article_shares
        .iter()
        .filter(|r| {
            let f = pub_total.exact[&r.country];
            100.0 * f.num as f64 > config.min_pub_share_pct * (f.den as f64 * pub_total.items)
        })
        .map(|r| r.country)
        .collect();

    let mut yearly_shares = Vec::new();
    for (year, t) in &ref_by_year {
        let full_total: u64 = t.full.values().sum();
        for c in t.fractional.keys() {
            let ci = match config.ci_counting {
                CiCounting::Full => wilson(t.full[c] as f64, full_total as f64, config.ci_level),
                CiCounting::Fractional => wilson(t.fractional[c], t.items, config.ci_level),
            };
            yearly_shares.push(SeriesRow { country: *c, year: *year, share_pct: t.share(*c), ci });
        }
    }
    yearly_shares.sort_by_key(|r| (r.country, r.year));

    // Lagged ratios.
    let lag = config.lag_years as i32;
    let mut ratios = Vec::new();
    let mut ratios_omitted = 0;
    let mut ratio_values: BTreeMap<CountryCode, Vec<(i32, f64)>> = BTreeMap::new();
    let mut sorted_focus = focus.clone();
    sorted_focus.sort();
    for &c in &sorted_focus {
        for (year, t) in &ref_by_year {
            let pub_share = pub_by_year.get(&(year - lag)).map(|p| p.share(c)).unwrap_or(0.0);
            if pub_share <= 0.0 {
                ratios_omitted += 1;
                continue;
            }
            let ref_share = t.share(c);
            let ratio = ref_share / pub_share;
            ratios.push(RatioRow {
                country: c,
                year: *year,
                pub_year: year - lag,
                ref_share_pct: ref_share,
                pub_share_pct: pub_share,
                ratio,
            });
            ratio_values.entry(c).or_default().push((*year, ratio));
        }
    }

    let aggregate_ratios = focus
        .iter()
        .filter(|c| pub_total.share(**c) > 0.0)
        .map(|&c| AggregateRatio {
            country: c,
            ref_share: ref_total.share(c),
            pub_share: pub_total.share(c),
            ratio: ref_total.share(c) / pub_total.share(c),
        })
        .collect();

    // Summary.
    let mut stats = Vec::new();
    for (c, values) in &ratio_values {
        let n = values.len() as f64;
        let mut sum = 0.0;
        for v in values {
            sum += v.1;
        }
        let mean = sum / n;
        let sd = if values.len() > 1 {
            let mut ss = 0.0;
            for v in values {
                ss += (v.1 - mean) * (v.1 - mean);
            }
            Some((ss / (n - 1.0)).sqrt())
        } else {
            None
        };
        let delta = values[values.len() - 1].1 - values[0].1;
        stats.push((*c, mean, sd, delta));
    }
    let rank_mean = ranks(&stats.iter().map(|s| (s.0, Some(s.1))).collect::<Vec<_>>());
    let rank_sd = ranks(&stats.iter().map(|s| (s.0, s.2)).collect::<Vec<_>>());
    let rank_delta = ranks(&stats.iter().map(|s| (s.0, Some(s.3))).collect::<Vec<_>>());
    let mut summary: Vec<SummaryRow> = stats
        .iter()
        .map(|(c, mean, sd, delta)| SummaryRow {
            country: *c,
            mean: *mean,
            rank_mean: rank_mean[c],
            sd: *sd,
            rank_sd: rank_sd[c],
            delta: *delta,
            rank_delta: rank_delta[c],
            class: class_of(*mean),
        })
        .collect();
    summary.sort_by_key(|s| s.rank_mean);

    // Domestic decomposition.
    let mut domestic = Vec::new();
    let mut domestic_omitted = 0;
    let mut domestic_values: BTreeMap<CountryCode, Vec<(i32, f64)>> = BTreeMap::new();
    let years: BTreeSet<i32> = refs.iter().map(|r| r.citing_year).collect();
    for &c in &sorted_focus {
        for &year in &years {
            let mut qualifying = 0u64;
            let mut domestic_refs = 0u64;
            let mut weight = 0.0;
            for r in refs.iter().filter(|r| r.citing_year == year) {
                let citing = by_id[r.citing.as_str()];
                let qualifies = match config.domestic_mode {
                    DomesticMode::AllElite => citing.countries.contains(&c),
                    DomesticMode::PurelyDomesticElite => citing.countries.len() == 1 && citing.countries[0] == c,
                };
                if !qualifies {
                    continue;
                }
                qualifying += 1;
                if r.cited_countries.contains(&c) {
                    domestic_refs += 1;
                    weight += match config.domestic_counting {
                        DomesticCounting::Full => 1.0,
                        DomesticCounting::Fractional => 1.0 / r.cited_countries.len() as f64,
                    };
                }
            }
            let pub_share = pub_by_year.get(&(year - lag)).map(|p| p.share(c)).unwrap_or(0.0) / 100.0;
            if qualifying == 0 || pub_share <= 0.0 {
                domestic_omitted += 1;
                continue;
            }
            let share = weight / qualifying as f64;
            domestic.push(DomesticRow {
                country: c,
                year,
                pub_year: year - lag,
                qualifying_refs: qualifying,
                domestic_refs,
                domestic_share: share,
                pub_share,
                ratio: share / pub_share,
            });
            domestic_values.entry(c).or_default().push((year, share / pub_share));
        }
    }

    let mut smoothed = Vec::new();
    for (kind, values) in [(SmoothedSeries::Lagged, &ratio_values), (SmoothedSeries::Domestic, &domestic_values)] {
        for (c, series) in values {
            let means = trailing_means(series, config.moving_average_window);
            for (i, (year, v)) in series.iter().enumerate() {
                smoothed.push(SmoothedRow { series: kind, country: *c, year: *year, value: *v, moving_average: means[i] });
            }
        }
    }

    IndicatorBundle {
        elite: elite.into_iter().map(|(id, cells)| EliteRow { id, cells }).collect(),
        thresholds,
        removal,
        article_shares,
        reference_shares: ref_total.rows(),
        focus_countries: focus,
        yearly_shares,
        ratios,
        ratios_omitted,
        aggregate_ratios,
        summary,
        domestic,
        domestic_omitted,
        smoothed,
    }
}
