//! Cited-reference extraction, the three cleaning filters, and fractional
//! country counting.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::citegraph::EliteSet;
use crate::corpus::{ArticleRecord, Corpus, MatchKey};
use crate::country::CountryCode;

/// References to articles published before this year carry no reliable
/// address data and are dropped.
pub const CITED_YEAR_FLOOR: i32 = 1980;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RefInstance {
    pub citing_id: String,
    pub citing_year: i32,
    pub cited_id: String,
    pub cited_countries: Vec<CountryCode>,
    pub cited_year: i32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RemovalStats {
    /// Distinct references of elite articles, after collapsing repeats.
    pub total_before: u64,
    /// No in-corpus target: unmatched keys, ambiguous keys, dangling ids.
    pub unresolved: u64,
    pub non_article: u64,
    pub no_country: u64,
    pub pre_1980: u64,
    /// Only non-zero when self-references are excluded.
    pub self_reference: u64,
    pub total_after: u64,
    /// Repeated references to one target within one elite article.
    pub duplicates_collapsed: u64,
    /// Share of `total_before` removed, all buckets.
    pub removal_pct: f64,
    /// Share removed by the three typed filters, relative to resolved references.
    pub typed_removal_pct: f64,
}

impl RemovalStats {
    fn finish(mut self) -> Self {
        let removed = self.total_before - self.total_after;
        self.removal_pct = percent(removed as f64, self.total_before as f64);
        let typed = self.non_article + self.no_country + self.pre_1980;
        self.typed_removal_pct = percent(typed as f64, (self.total_before - self.unresolved) as f64);
        self
    }
}

fn percent(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        100.0 * part / whole
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub exclude_self_references: bool,
}

/// The cleaning filters, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleaningFilter {
    DocumentType,
    Country,
    Year,
}

impl CleaningFilter {
    pub const ORDER: [CleaningFilter; 3] = [Self::DocumentType, Self::Country, Self::Year];

    pub fn admits(self, cited: &ArticleRecord) -> bool {
        match self {
            Self::DocumentType => cited.is_article(),
            Self::Country => !cited.countries.is_empty(),
            Self::Year => cited.publication_year >= CITED_YEAR_FLOOR,
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum RefIdentity<'a> {
    Id(&'a str),
    Key(&'a MatchKey),
}

/// Follows every elite article's reference list and keeps the references that
/// survive the cleaning filters. Output is ordered by (citing id, cited id).
pub fn extract_references(
    elite: &EliteSet,
    corpus: &Corpus,
    options: ExtractOptions,
) -> (Vec<RefInstance>, RemovalStats) {
    let mut stats = RemovalStats::default();
    let mut out = Vec::new();
    for citing_id in elite.ids() {
        let Some(citing) = corpus.get(citing_id) else { continue };
        let mut distinct: BTreeSet<RefIdentity<'_>> = BTreeSet::new();
        for r in &citing.references {
            let identity = match (r.resolved_id.as_deref(), r.match_key.as_deref()) {
                (Some(id), _) => RefIdentity::Id(id),
                (None, Some(key)) => RefIdentity::Key(key),
                (None, None) => continue,
            };
            if !distinct.insert(identity) {
                stats.duplicates_collapsed += 1;
            }
        }
        for identity in distinct {
            stats.total_before += 1;
            let cited = match identity {
                RefIdentity::Id(id) => corpus.get(id),
                RefIdentity::Key(_) => None,
            };
            let Some(cited) = cited else {
                stats.unresolved += 1;
                continue;
            };
            if let Some(filter) = CleaningFilter::ORDER.into_iter().find(|f| !f.admits(cited)) {
                match filter {
                    CleaningFilter::DocumentType => stats.non_article += 1,
                    CleaningFilter::Country => stats.no_country += 1,
                    CleaningFilter::Year => stats.pre_1980 += 1,
                }
                continue;
            }
            if options.exclude_self_references && cited.id == citing.id {
                stats.self_reference += 1;
                continue;
            }
            out.push(RefInstance {
                citing_id: citing.id.clone(),
                citing_year: citing.publication_year,
                cited_id: cited.id.clone(),
                cited_countries: cited.countries.clone(),
                cited_year: cited.publication_year,
            });
        }
    }
    stats.total_after = out.len() as u64;
    (out, stats.finish())
}

// ---------------------------------------------------------------------------
// Tallies

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("tally item {0} has no countries")]
pub struct EmptyItem(pub usize);

/// Per-country membership counts bucketed by item arity.
///
/// `by_arity[n - 1]` counts items with exactly `n` countries that include this
/// country. Integer buckets make merging exact, so a tally does not depend on
/// how its items were sharded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArityCounts {
    by_arity: Vec<u64>,
}

impl ArityCounts {
    fn add(&mut self, arity: usize, times: u64) {
        if self.by_arity.len() < arity {
            self.by_arity.resize(arity, 0);
        }
        self.by_arity[arity - 1] += times;
    }

    fn merge(&mut self, other: &ArityCounts) {
        for (n, &c) in other.by_arity.iter().enumerate() {
            if c > 0 {
                self.add(n + 1, c);
            }
        }
    }

    pub fn full(&self) -> u64 {
        self.by_arity.iter().sum()
    }

    /// Σ count/n, summed in ascending arity.
    pub fn fractional(&self) -> f64 {
        self.by_arity.iter().enumerate().map(|(n, &c)| c as f64 / (n + 1) as f64).sum()
    }

    /// Items in which this country was the only one.
    pub fn solo(&self) -> u64 {
        self.by_arity.first().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryTally {
    items: u64,
    countries: BTreeMap<CountryCode, ArityCounts>,
}

impl CountryTally {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one item. Repeated countries within the item count once.
    pub fn add(&mut self, countries: &[CountryCode]) -> Result<(), EmptyItem> {
        if countries.is_empty() {
            return Err(EmptyItem(self.items as usize));
        }
        let strictly_sorted = countries.windows(2).all(|w| w[0] < w[1]);
        if strictly_sorted {
            self.add_distinct(countries);
        } else {
            let mut distinct = countries.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            self.add_distinct(&distinct);
        }
        Ok(())
    }

    fn add_distinct(&mut self, countries: &[CountryCode]) {
        self.items += 1;
        for &c in countries {
            self.countries.entry(c).or_default().add(countries.len(), 1);
        }
    }

    /// Associative, commutative merge.
    pub fn merge(&mut self, other: &CountryTally) {
        self.items += other.items;
        for (c, counts) in &other.countries {
            self.countries.entry(*c).or_default().merge(counts);
        }
    }

    pub fn items(&self) -> u64 {
        self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items == 0
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.countries.keys().copied()
    }

    pub fn counts(&self, country: CountryCode) -> Option<&ArityCounts> {
        self.countries.get(&country)
    }

    pub fn full_count(&self, country: CountryCode) -> u64 {
        self.counts(country).map_or(0, ArityCounts::full)
    }

    pub fn fractional_count(&self, country: CountryCode) -> f64 {
        self.counts(country).map_or(0.0, ArityCounts::fractional)
    }

    /// Σ full counts: the number of (item, country) pairs.
    pub fn full_total(&self) -> u64 {
        self.countries.values().map(ArityCounts::full).sum()
    }

    pub fn fractional_share(&self, country: CountryCode) -> f64 {
        share_percent(self.fractional_count(country), self.items as f64)
    }

    pub fn full_share(&self, country: CountryCode) -> f64 {
        share_percent(self.full_count(country) as f64, self.full_total() as f64)
    }
}

/// `100 * count / total`, zero for an empty total.
pub fn share_percent(count: f64, total: f64) -> f64 {
    percent(count, total)
}

/// Fractional counting: an item with n distinct countries gives 1/n to each.
pub fn fractional_tally<'a, I>(items: I) -> Result<CountryTally, EmptyItem>
where
    I: IntoIterator<Item = &'a [CountryCode]>,
{
    let mut tally = CountryTally::new();
    for item in items {
        tally.add(item)?;
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub country: CountryCode,
    pub full_count: u64,
    pub fractional_count: f64,
    pub fractional_share_pct: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareOrder {
    /// Descending fractional share, ties by country code.
    #[default]
    ShareDescending,
    CountryAscending,
}

/// Builds share rows from raw per-country counts.
pub fn share_rows(
    entries: impl IntoIterator<Item = (CountryCode, u64, f64)>,
    total_items: f64,
    order: ShareOrder,
) -> Vec<ShareRow> {
    let mut rows: Vec<ShareRow> = entries
        .into_iter()
        .map(|(country, full_count, fractional_count)| ShareRow {
            country,
            full_count,
            fractional_count,
            fractional_share_pct: share_percent(fractional_count, total_items),
        })
        .collect();
    match order {
        ShareOrder::ShareDescending => rows.sort_by(|a, b| {
            b.fractional_share_pct.total_cmp(&a.fractional_share_pct).then(a.country.cmp(&b.country))
        }),
        ShareOrder::CountryAscending => rows.sort_by_key(|r| r.country),
    }
    rows
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Fractional counts scaled to integers over a common denominator, so that
/// mathematically equal counts compare equal. `None` when the scaled values
/// would not fit in 128 bits.
fn exact_fractional_keys(tally: &CountryTally) -> Option<(BTreeMap<CountryCode, u128>, u128)> {
    let max_arity = tally.countries.values().map(|c| c.by_arity.len()).max().unwrap_or(1);
    let mut lcm: u128 = 1;
    for n in 1..=max_arity as u128 {
        lcm = lcm.checked_mul(n / gcd(lcm, n))?;
    }
    let mut keys = BTreeMap::new();
    for (c, counts) in &tally.countries {
        let mut key: u128 = 0;
        for (n, &k) in counts.by_arity.iter().enumerate() {
            key = key.checked_add(u128::from(k).checked_mul(lcm / (n as u128 + 1))?)?;
        }
        keys.insert(*c, key);
    }
    Some((keys, lcm))
}

/// Rows for every country in the tally. Descending order compares exact
/// fractional counts, so tied countries always fall back to code order.
pub fn share_table(tally: &CountryTally, order: ShareOrder) -> Vec<ShareRow> {
    let mut rows = share_rows(
        tally.countries.iter().map(|(c, counts)| (*c, counts.full(), counts.fractional())),
        tally.items as f64,
        order,
    );
    if order == ShareOrder::ShareDescending {
        if let Some((keys, _)) = exact_fractional_keys(tally) {
            rows.sort_by(|a, b| keys[&b.country].cmp(&keys[&a.country]).then(a.country.cmp(&b.country)));
        }
    }
    rows
}

/// Countries whose fractional share strictly exceeds `min_share_percent`,
/// by descending share.
pub fn country_threshold_filter(pub_tally: &CountryTally, min_share_percent: f64) -> Vec<CountryCode> {
    let exact = exact_fractional_keys(pub_tally);
    share_table(pub_tally, ShareOrder::ShareDescending)
        .into_iter()
        .filter(|row| match &exact {
            // 100 * key / (lcm * items) > min, with both sides integral before the final product.
            Some((keys, lcm)) => {
                100.0 * keys[&row.country] as f64 > min_share_percent * (*lcm as f64 * pub_tally.items as f64)
            }
            None => row.fractional_share_pct > min_share_percent,
        })
        .map(|row| row.country)
        .collect()
}
