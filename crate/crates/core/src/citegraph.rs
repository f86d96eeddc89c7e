//! Cited-by inversion and top-percentile ("elite") selection per
//! (subject category, publication year) cell.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

/// Inclusive year range; open ends admit every year.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    #[serde(default)]
    pub from: Option<i32>,
    #[serde(default)]
    pub to: Option<i32>,
}

impl YearWindow {
    pub const OPEN: YearWindow = YearWindow { from: None, to: None };

    pub fn new(from: i32, to: i32) -> Self {
        Self { from: Some(from), to: Some(to) }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.from.map_or(true, |f| year >= f) && self.to.map_or(true, |t| year <= t)
    }
}

/// Resolved, in-corpus citation edges in compressed sparse row form.
///
/// Row `i` lists the distinct articles cited by article `i`, ascending. Repeated
/// references to one target collapse to a single edge.
#[derive(Debug, Clone, Default)]
pub struct CitationGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl CitationGraph {
    pub fn build(corpus: &Corpus) -> Self {
        let rows: Vec<Vec<u32>> = corpus
            .articles()
            .par_iter()
            .with_min_len(256)
            .map(|article| {
                let mut row: Vec<u32> = article
                    .references
                    .iter()
                    .filter_map(|r| r.resolved_id.as_deref())
                    .filter_map(|id| corpus.index_of(id))
                    .map(|i| i as u32)
                    .collect();
                row.sort_unstable();
                row.dedup();
                row
            })
            .collect();
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut targets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        offsets.push(0);
        for row in rows {
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn cited_by(&self, citing: usize) -> &[u32] {
        &self.targets[self.offsets[citing]..self.offsets[citing + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn article_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// Inbound citation counts, indexed like [`Corpus::articles`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CitationCounts {
    counts: Vec<u32>,
}

impl CitationCounts {
    pub fn from_vec(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn get(&self, index: usize) -> u32 {
        self.counts[index]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

/// Counts, for every article, the distinct citing articles inside `citing_window`.
pub fn invert_citations(corpus: &Corpus, citing_window: YearWindow) -> CitationCounts {
    invert_graph(corpus, &CitationGraph::build(corpus), citing_window)
}

pub fn invert_graph(corpus: &Corpus, graph: &CitationGraph, citing_window: YearWindow) -> CitationCounts {
    let mut counts = vec![0u32; corpus.len()];
    for (i, article) in corpus.articles().iter().enumerate() {
        if !citing_window.contains(article.publication_year) {
            continue;
        }
        for &t in graph.cited_by(i) {
            counts[t as usize] += 1;
        }
    }
    CitationCounts { counts }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub category: String,
    pub year: i32,
}

impl CellKey {
    pub fn new(category: impl Into<String>, year: i32) -> Self {
        Self { category: category.into(), year }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.category, self.year)
    }
}

/// Cell → member article indices (ascending, hence id-ascending).
pub type CellPartition = BTreeMap<CellKey, Vec<u32>>;

/// Groups document-type `article` records by (category, publication year).
/// An article with k categories lands in k cells.
pub fn cell_partition(corpus: &Corpus) -> CellPartition {
    let mut grouped: HashMap<(&str, i32), Vec<u32>> = HashMap::new();
    for (i, article) in corpus.articles().iter().enumerate() {
        if !article.is_article() {
            continue;
        }
        for category in &article.subject_categories {
            grouped.entry((category.as_str(), article.publication_year)).or_default().push(i as u32);
        }
    }
    grouped.into_iter().map(|((c, y), members)| (CellKey::new(c, y), members)).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Admit everything tied with the k-th ranked article.
    #[default]
    IncludeTies,
    /// Admit exactly k articles, ties broken by ascending id.
    StrictRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellThreshold {
    pub size: usize,
    /// Target elite count, `ceil(fraction * size)`.
    pub quota: usize,
    /// Lowest inbound count admitted.
    pub threshold: u32,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteSet {
    /// Elite article id → cells in which it qualified.
    pub members: BTreeMap<String, Vec<CellKey>>,
    pub cell_thresholds: BTreeMap<CellKey, CellThreshold>,
    pub fraction: f64,
    pub tie_policy: TiePolicy,
}

impl EliteSet {
    pub fn contains(&self, id: &str) -> bool {
        self.members.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.members.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("elite fraction must lie in (0, 1], got {0}")]
pub struct FractionOutOfRange(pub f64);

/// `ceil(fraction * size)`, clamped to `[1, size]`.
///
/// The product is nudged down by a relative 1e-12 before rounding up so that
/// binary representation error (0.07 * 100 = 7.000000000000001) does not
/// push an exact integer quota to the next value.
pub fn elite_quota(fraction: f64, size: usize) -> usize {
    let raw = fraction * size as f64;
    let k = (raw - raw * 1e-12).ceil() as usize;
    k.clamp(1, size.max(1))
}

pub fn validate_fraction(fraction: f64) -> Result<f64, FractionOutOfRange> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(fraction)
    } else {
        Err(FractionOutOfRange(fraction))
    }
}

/// Selects the most-cited `fraction` of every cell.
///
/// Within a cell, articles rank by count descending, then id ascending. Empty
/// cells are skipped.
pub fn elite_select(
    corpus: &Corpus,
    cells: &CellPartition,
    counts: &CitationCounts,
    fraction: f64,
    tie_policy: TiePolicy,
) -> Result<EliteSet, FractionOutOfRange> {
    validate_fraction(fraction)?;
    let per_cell: Vec<(&CellKey, CellThreshold, Vec<u32>)> = cells
        .par_iter()
        .filter(|(_, members)| !members.is_empty())
        .map(|(key, members)| {
            let mut ranked = members.clone();
            ranked.sort_unstable_by(|&a, &b| {
                counts.get(b as usize).cmp(&counts.get(a as usize)).then(a.cmp(&b))
            });
            let quota = elite_quota(fraction, ranked.len());
            let threshold = counts.get(ranked[quota - 1] as usize);
            let take = match tie_policy {
                TiePolicy::StrictRank => quota,
                TiePolicy::IncludeTies => {
                    ranked.partition_point(|&i| counts.get(i as usize) >= threshold)
                }
            };
            ranked.truncate(take);
            let info = CellThreshold { size: members.len(), quota, threshold, selected: take };
            (key, info, ranked)
        })
        .collect();

    let mut members: BTreeMap<String, Vec<CellKey>> = BTreeMap::new();
    let mut cell_thresholds = BTreeMap::new();
    for (key, info, selected) in per_cell {
        for i in selected {
            let id = &corpus.articles()[i as usize].id;
            members.entry(id.clone()).or_default().push(key.clone());
        }
        cell_thresholds.insert(key.clone(), info);
    }
    Ok(EliteSet { members, cell_thresholds, fraction, tie_policy })
}
