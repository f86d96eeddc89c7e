//! Seeded synthetic corpora and the brute-force indicator oracle.
//!
//! # Generation procedure
//!
//! All randomness comes from one [`SplitMix64`] stream seeded with
//! `params.seed`, consumed strictly in the order below.
//!
//! 1. Non-article pool, `max(1, n/20)` records `B0000000…`: type cycles through
//!    book, book-chapter, conference-paper, note, letter, dissertation, news,
//!    other; year `y0 + below(span)`; one category `below(ncat)`; one country
//!    by weight.
//! 2. Historical pool, `max(1, n/20)` records `H0000000…`: type article, year
//!    `1950 + below(30)`, one category, one country by weight.
//! 3. Main articles `A00000000…`, index `i` in `0..n`, year
//!    `y0 + i * span / n` (so articles are created in year order). For each:
//!    * category `below(ncat)`; with probability 0.25 a second one
//!      (`below(ncat)`, kept only if different);
//!    * with probability `missing_country_fraction` no countries; otherwise
//!      one country by weight, then up to three extra draws each taken with
//!      probability `collaboration_probability` (stop at the first miss;
//!      duplicates are skipped);
//!    * reference count `below(floor(2 * mean_references) + 1)`; per
//!      reference draw `u = next_f64`: `u < non_article_fraction` cites the
//!      non-article pool (`below(pool)`), `u < non_article + pre_1980` cites the
//!      historical pool, anything else cites an earlier-year main article. With
//!      attachment exponent 0 that is `below(limit)`; otherwise article `j` has
//!      weight `(indegree_j + 1)^exponent` and the pick is the first `j` whose
//!      running weight sum exceeds `next_f64 * total`. Running sums are kept in
//!      a Fenwick tree over `0..n` (standard lowest-set-bit layout, 1-based),
//!      and ports must add weights in that tree's order to reproduce picks
//!      bit-for-bit. No earlier-year article
//!      means the reference is skipped and counted. Finally, with probability
//!      `key_reference_fraction` the reference is written as an
//!      author/year/volume/page key instead of an id;
//!    * after all references of article `i` are drawn, in-degrees of its
//!      main-article targets are incremented (once per reference).
//!
//! Weighted country picks use `next_f64 * Σweights` against the cumulative
//! weights in pool order. Every record carries a unique key: main article
//! `i` is author `Author{i % 997}`, volume `i / 997`, page `i % 89 + 1`;
//! pool records use authors `Book{j}` / `Hist{j}`, volume `1`, page `1`.
//! Records are emitted main articles first, then the two pools.

mod oracle;
mod rng;

pub use oracle::oracle_indicators;
pub use rng::SplitMix64;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_corpus_str, resolve_references, Corpus, IngestOptions, RawRecord, RawReference, TextOrNumber};
use crate::config::ConfigError;
use crate::country::CountryCode;

/// The 21 countries above 1% of world articles, weighted by their
/// fractionally counted article totals.
const DEFAULT_COUNTRY_WEIGHTS: &[(&str, f64)] = &[
    ("US", 2_634_682.58),
    ("CN", 1_080_633.73),
    ("JP", 642_650.14),
    ("GB", 610_480.36),
    ("DE", 588_873.30),
    ("FR", 415_985.78),
    ("CA", 368_465.44),
    ("IT", 348_992.92),
    ("IN", 324_676.10),
    ("KR", 309_488.83),
    ("ES", 302_138.84),
    ("AU", 260_940.89),
    ("BR", 233_401.27),
    ("RU", 212_192.69),
    ("TW", 192_525.35),
    ("NL", 186_951.06),
    ("TR", 178_076.95),
    ("PL", 140_765.21),
    ("SE", 126_237.57),
    ("CH", 122_881.07),
    ("IR", 122_174.78),
];

const NON_ARTICLE_TYPES: [&str; 8] =
    ["book", "book-chapter", "conference-paper", "note", "letter", "dissertation", "news", "other"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub seed: u64,
    pub n_articles: usize,
    /// Inclusive publication-year range of main articles.
    pub years: (i32, i32),
    pub countries: Vec<(CountryCode, f64)>,
    pub categories: Vec<String>,
    pub mean_references: f64,
    pub collaboration_probability: f64,
    /// 0 picks earlier articles uniformly; larger values favour highly cited ones.
    pub attachment_exponent: f64,
    pub non_article_fraction: f64,
    pub missing_country_fraction: f64,
    pub pre_1980_fraction: f64,
    pub key_reference_fraction: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_articles: 1000,
            years: (2001, 2013),
            countries: DEFAULT_COUNTRY_WEIGHTS
                .iter()
                .map(|(c, w)| (CountryCode::new(c).expect("valid code"), *w))
                .collect(),
            categories: (1..=8).map(|i| format!("C{i:02}")).collect(),
            mean_references: 10.0,
            collaboration_probability: 0.25,
            attachment_exponent: 1.0,
            non_article_fraction: 0.15,
            missing_country_fraction: 0.05,
            pre_1980_fraction: 0.1,
            key_reference_fraction: 0.1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic parameter `{0}`: {1}")]
    Param(&'static str, String),
    #[error("failed to write synthetic corpus: {0}")]
    Io(#[from] io::Error),
}

impl SynthParams {
    /// Parses a JSON parameter document; missing keys take defaults.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let params: SynthParams = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError { path: e.path().to_string(), message: e.into_inner().to_string() })?;
        params.validate().map_err(|e| match e {
            SynthError::Param(path, message) => ConfigError { path: path.into(), message },
            other => ConfigError { path: String::new(), message: other.to_string() },
        })?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SynthError::Param(name, format!("{v} is outside [0, 1]")))
            }
        };
        unit("collaboration_probability", self.collaboration_probability)?;
        unit("non_article_fraction", self.non_article_fraction)?;
        unit("missing_country_fraction", self.missing_country_fraction)?;
        unit("pre_1980_fraction", self.pre_1980_fraction)?;
        unit("key_reference_fraction", self.key_reference_fraction)?;
        if self.non_article_fraction + self.pre_1980_fraction > 1.0 {
            return Err(SynthError::Param("pre_1980_fraction", "noise fractions sum above 1".into()));
        }
        if self.years.0 > self.years.1 {
            return Err(SynthError::Param("years", "start is after end".into()));
        }
        if self.countries.is_empty() || self.countries.iter().any(|(_, w)| !(*w > 0.0 && w.is_finite())) {
            return Err(SynthError::Param("countries", "need at least one positive weight".into()));
        }
        if self.categories.is_empty() {
            return Err(SynthError::Param("categories", "need at least one category".into()));
        }
        if !(self.mean_references >= 0.0 && self.mean_references.is_finite()) {
            return Err(SynthError::Param("mean_references", "must be non-negative".into()));
        }
        if !(self.attachment_exponent >= 0.0 && self.attachment_exponent.is_finite()) {
            return Err(SynthError::Param("attachment_exponent", "must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    pub records: u64,
    pub references: u64,
    pub non_article_references: u64,
    pub pre_1980_references: u64,
    pub keyed_references: u64,
    /// References skipped because no earlier-year article existed.
    pub infeasible_references: u64,
    pub max_in_degree: u64,
}

/// Prefix sums over positive weights with point updates.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn with_unit_weights(n: usize) -> Self {
        let mut tree = vec![1.0; n + 1];
        tree[0] = 0.0;
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Self { tree }
    }

    fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, len: usize) -> f64 {
        let mut i = len;
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// First index whose running sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.checked_next_power_of_two().unwrap_or(0);
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

struct PoolRecord {
    id: String,
    year: i32,
}

fn weighted_country(rng: &mut SplitMix64, countries: &[(CountryCode, f64)], total: f64) -> CountryCode {
    let x = rng.next_f64() * total;
    let mut acc = 0.0;
    for (c, w) in countries {
        acc += w;
        if x < acc {
            return *c;
        }
    }
    countries[countries.len() - 1].0
}

fn article_key(i: usize) -> (String, String, String) {
    (format!("Author{}", i % 997), (i / 997).to_string(), (i % 89 + 1).to_string())
}

/// Generates a corpus, handing each record to `emit` in output order.
pub fn generate_with<F: FnMut(RawRecord)>(params: &SynthParams, mut emit: F) -> Result<SynthStats, SynthError> {
    params.validate()?;
    let mut stats = SynthStats::default();
    let n = params.n_articles;
    if n == 0 {
        return Ok(stats);
    }
    let mut rng = SplitMix64::new(params.seed);
    let weight_total: f64 = params.countries.iter().map(|(_, w)| w).sum();
    let ncat = params.categories.len() as u64;
    let (y0, y1) = params.years;
    let span = (y1 - y0 + 1) as u64;
    let pool_size = (n / 20).max(1);

    let mut pool_records = Vec::with_capacity(2 * pool_size);
    let mut non_article_pool = Vec::with_capacity(pool_size);
    for j in 0..pool_size {
        let year = y0 + rng.below(span) as i32;
        let category = params.categories[rng.below(ncat) as usize].clone();
        let country = weighted_country(&mut rng, &params.countries, weight_total);
        let id = format!("B{j:07}");
        pool_records.push(RawRecord {
            id: Some(id.clone()),
            year: Some(i64::from(year)),
            doc_type: Some(NON_ARTICLE_TYPES[j % NON_ARTICLE_TYPES.len()].to_owned()),
            categories: vec![category],
            countries: vec![country.to_string()],
            refs: Vec::new(),
            author: Some(format!("Book{j}")),
            volume: Some(TextOrNumber::Text("1".into())),
            page: Some(TextOrNumber::Text("1".into())),
        });
        non_article_pool.push(PoolRecord { id, year });
    }
    let mut historical_pool = Vec::with_capacity(pool_size);
    for j in 0..pool_size {
        let year = 1950 + rng.below(30) as i32;
        let category = params.categories[rng.below(ncat) as usize].clone();
        let country = weighted_country(&mut rng, &params.countries, weight_total);
        let id = format!("H{j:07}");
        pool_records.push(RawRecord {
            id: Some(id.clone()),
            year: Some(i64::from(year)),
            doc_type: Some("article".into()),
            categories: vec![category],
            countries: vec![country.to_string()],
            refs: Vec::new(),
            author: Some(format!("Hist{j}")),
            volume: Some(TextOrNumber::Text("1".into())),
            page: Some(TextOrNumber::Text("1".into())),
        });
        historical_pool.push(PoolRecord { id, year });
    }

    let year_of = |i: usize| y0 + ((i as u64 * span) / n as u64) as i32;
    let uniform = params.attachment_exponent == 0.0;
    let mut fenwick = if uniform { None } else { Some(Fenwick::with_unit_weights(n)) };
    let mut in_degree = vec![0u32; n];
    let max_refs = (2.0 * params.mean_references).floor() as u64 + 1;
    let mut year_start = 0usize;
    let mut current_year = year_of(0);
    let mut targets: Vec<usize> = Vec::new();

    for i in 0..n {
        let year = year_of(i);
        if year != current_year {
            current_year = year;
            year_start = i;
        }

        let mut categories = vec![params.categories[rng.below(ncat) as usize].clone()];
        if rng.chance(0.25) {
            let extra = &params.categories[rng.below(ncat) as usize];
            if *extra != categories[0] {
                categories.push(extra.clone());
            }
        }

        let mut countries: Vec<CountryCode> = Vec::new();
        if !rng.chance(params.missing_country_fraction) {
            countries.push(weighted_country(&mut rng, &params.countries, weight_total));
            for _ in 0..3 {
                if !rng.chance(params.collaboration_probability) {
                    break;
                }
                let c = weighted_country(&mut rng, &params.countries, weight_total);
                if !countries.contains(&c) {
                    countries.push(c);
                }
            }
        }

        let ref_count = rng.below(max_refs);
        let mut refs = Vec::with_capacity(ref_count as usize);
        targets.clear();
        for _ in 0..ref_count {
            let u = rng.next_f64();
            let (id, key) = if u < params.non_article_fraction {
                let j = rng.below(non_article_pool.len() as u64) as usize;
                stats.non_article_references += 1;
                let p = &non_article_pool[j];
                (p.id.clone(), (format!("Book{j}"), p.year, "1".to_owned(), "1".to_owned()))
            } else if u < params.non_article_fraction + params.pre_1980_fraction {
                let j = rng.below(historical_pool.len() as u64) as usize;
                stats.pre_1980_references += 1;
                let p = &historical_pool[j];
                (p.id.clone(), (format!("Hist{j}"), p.year, "1".to_owned(), "1".to_owned()))
            } else {
                let limit = year_start;
                if limit == 0 {
                    stats.infeasible_references += 1;
                    continue;
                }
                let j = match fenwick.as_ref() {
                    None => rng.below(limit as u64) as usize,
                    Some(tree) => {
                        let x = rng.next_f64() * tree.prefix(limit);
                        tree.find(x).min(limit - 1)
                    }
                };
                targets.push(j);
                let (author, volume, page) = article_key(j);
                (format!("A{j:08}"), (author, year_of(j), volume, page))
            };
            stats.references += 1;
            if rng.chance(params.key_reference_fraction) {
                stats.keyed_references += 1;
                refs.push(RawReference {
                    id: None,
                    author: Some(key.0),
                    year: Some(i64::from(key.1)),
                    volume: Some(TextOrNumber::Text(key.2)),
                    page: Some(TextOrNumber::Text(key.3)),
                });
            } else {
                refs.push(RawReference { id: Some(id), ..RawReference::default() });
            }
        }
        for &j in &targets {
            in_degree[j] += 1;
            if let Some(tree) = fenwick.as_mut() {
                let d = f64::from(in_degree[j]);
                let e = params.attachment_exponent;
                tree.add(j, (d + 1.0).powf(e) - d.powf(e));
            }
        }

        let (author, volume, page) = article_key(i);
        stats.records += 1;
        emit(RawRecord {
            id: Some(format!("A{i:08}")),
            year: Some(i64::from(year)),
            doc_type: Some("article".into()),
            categories,
            countries: countries.iter().map(ToString::to_string).collect(),
            refs,
            author: Some(author),
            volume: Some(TextOrNumber::Text(volume)),
            page: Some(TextOrNumber::Text(page)),
        });
    }
    stats.max_in_degree = in_degree.iter().copied().max().map_or(0, u64::from);
    for record in pool_records {
        stats.records += 1;
        emit(record);
    }
    Ok(stats)
}

/// Writes the corpus as line-delimited JSON.
pub fn write_jsonl<W: Write>(params: &SynthParams, writer: W) -> Result<SynthStats, SynthError> {
    let mut writer = io::BufWriter::new(writer);
    let mut failure: Option<io::Error> = None;
    let stats = generate_with(params, |record| {
        if failure.is_some() {
            return;
        }
        let result = serde_json::to_writer(&mut writer, &record)
            .map_err(io::Error::from)
            .and_then(|_| writer.write_all(b"\n"));
        if let Err(e) = result {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    writer.flush()?;
    Ok(stats)
}

pub fn generate_jsonl(params: &SynthParams) -> Result<(String, SynthStats), SynthError> {
    let mut buf = Vec::new();
    let stats = write_jsonl(params, &mut buf)?;
    Ok((String::from_utf8(buf).expect("serde_json emits UTF-8"), stats))
}

/// Generates, ingests, and resolves a synthetic corpus.
pub fn generate_corpus(params: &SynthParams) -> Result<Corpus, SynthError> {
    let (text, _) = generate_jsonl(params)?;
    Ok(resolve_references(parse_corpus_str(&text, &IngestOptions::default())))
}
