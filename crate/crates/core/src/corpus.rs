//! Corpus data model, line-delimited ingestion, and reference resolution.
//!
//! One input line holds one JSON object:
//!
//! ```text
//! {"id":"A1","year":2005,"type":"article","categories":["C1"],
//!  "countries":["US","DE"],"refs":[{"id":"A0"},{"author":"Smith","year":1999,"volume":"12","page":"101"}]}
//! ```
//!
//! Records may also carry their own `"author"`, `"volume"` and `"page"`; together
//! with `"year"` these form the key that unresolved references are matched
//! against. Unknown fields are ignored.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::country::CountryCode;

pub const DEFAULT_YEAR_WINDOW: (i32, i32) = (1900, 2100);

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("failed to read corpus input: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus input is not valid UTF-8 (byte offset {0})")]
    Utf8(usize),
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentType {
    Article,
    Book,
    BookChapter,
    ConferencePaper,
    Note,
    Letter,
    Dissertation,
    News,
    Other,
}

impl DocumentType {
    pub fn as_str(self) -> &'static str {
        match self {
            DocumentType::Article => "article",
            DocumentType::Book => "book",
            DocumentType::BookChapter => "book-chapter",
            DocumentType::ConferencePaper => "conference-paper",
            DocumentType::Note => "note",
            DocumentType::Letter => "letter",
            DocumentType::Dissertation => "dissertation",
            DocumentType::News => "news",
            DocumentType::Other => "other",
        }
    }

    /// Maps a free-form type tag onto the closed set. Returns the type and
    /// whether the tag was already canonical.
    pub fn normalize(tag: &str) -> (Self, bool) {
        let folded: String = tag
            .trim()
            .chars()
            .map(|c| if c == '_' || c.is_whitespace() { '-' } else { c.to_ascii_lowercase() })
            .collect();
        let doc_type = match folded.as_str() {
            "article" | "journal-article" | "research-article" => DocumentType::Article,
            "book" | "monograph" | "edited-book" => DocumentType::Book,
            "book-chapter" | "chapter" => DocumentType::BookChapter,
            "conference-paper" | "proceedings-paper" | "proceedings-article" | "meeting-abstract" => {
                DocumentType::ConferencePaper
            }
            "note" => DocumentType::Note,
            "letter" => DocumentType::Letter,
            "dissertation" | "thesis" => DocumentType::Dissertation,
            "news" | "news-item" => DocumentType::News,
            _ => DocumentType::Other,
        };
        (doc_type, doc_type.as_str() == tag)
    }
}

impl fmt::Display for DocumentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bibliographic key for exact-match reference resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchKey {
    pub surname: String,
    pub year: i32,
    pub volume: String,
    pub page: String,
}

impl MatchKey {
    /// Surname is lowercased and whitespace-collapsed; volume and page are trimmed.
    pub fn new(surname: &str, year: i32, volume: &str, page: &str) -> Self {
        Self {
            surname: surname.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase(),
            year,
            volume: volume.trim().to_owned(),
            page: page.trim().to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceEntry {
    pub resolved_id: Option<String>,
    pub match_key: Option<Box<MatchKey>>,
}

impl ReferenceEntry {
    pub fn to_id(id: impl Into<String>) -> Self {
        Self { resolved_id: Some(id.into()), match_key: None }
    }

    pub fn to_key(key: MatchKey) -> Self {
        Self { resolved_id: None, match_key: Some(Box::new(key)) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    pub id: String,
    pub publication_year: i32,
    pub document_type: DocumentType,
    /// Sorted, deduplicated, never empty.
    pub subject_categories: Vec<String>,
    /// Sorted, deduplicated. May be empty.
    pub countries: Vec<CountryCode>,
    pub references: Vec<ReferenceEntry>,
    /// The record's own key, when author/volume/page were supplied.
    pub match_key: Option<Box<MatchKey>>,
}

impl ArticleRecord {
    pub fn is_article(&self) -> bool {
        self.document_type == DocumentType::Article
    }
}

// ---------------------------------------------------------------------------
// Wire format

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TextOrNumber {
    Text(String),
    Number(i64),
}

impl TextOrNumber {
    fn into_string(self) -> String {
        match self {
            TextOrNumber::Text(s) => s,
            TextOrNumber::Number(n) => n.to_string(),
        }
    }
}

/// One reference object as it appears on the wire.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReference {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<TextOrNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<TextOrNumber>,
}

/// One input line, before validation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i64>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub doc_type: Option<String>,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub countries: Vec<String>,
    #[serde(default)]
    pub refs: Vec<RawReference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<TextOrNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<TextOrNumber>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BlankLine,
    MalformedRecord,
    MissingId,
    MissingYear,
    YearOutOfWindow,
    MissingCategories,
    DuplicateId,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("unknown"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repairs {
    pub countries_normalized: bool,
    pub countries_dropped: u32,
    pub document_type_mapped: bool,
    pub categories_deduplicated: bool,
    pub references_dropped: u32,
}

impl Repairs {
    pub fn any(&self) -> bool {
        self.countries_normalized
            || self.countries_dropped > 0
            || self.document_type_mapped
            || self.categories_deduplicated
            || self.references_dropped > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Inclusive publication-year validity window.
    pub year_window: (i32, i32),
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { year_window: DEFAULT_YEAR_WINDOW }
    }
}

fn key_from_parts(
    author: Option<&str>,
    year: Option<i64>,
    volume: Option<&TextOrNumber>,
    page: Option<&TextOrNumber>,
) -> Option<MatchKey> {
    let (author, year, volume, page) = (author?, year?, volume?, page?);
    let year = i32::try_from(year).ok()?;
    let volume = volume.clone().into_string();
    let page = page.clone().into_string();
    if author.trim().is_empty() {
        return None;
    }
    Some(MatchKey::new(author, year, &volume, &page))
}

/// Validates and normalizes one parsed record.
pub fn validate_record(
    raw: RawRecord,
    options: &IngestOptions,
) -> Result<(ArticleRecord, Repairs), RejectReason> {
    let id = match raw.id {
        Some(id) if !id.trim().is_empty() => id,
        _ => return Err(RejectReason::MissingId),
    };
    let year = raw.year.ok_or(RejectReason::MissingYear)?;
    let (lo, hi) = options.year_window;
    if year < i64::from(lo) || year > i64::from(hi) {
        return Err(RejectReason::YearOutOfWindow);
    }
    let publication_year = year as i32;

    let mut repairs = Repairs::default();

    let mut categories: Vec<String> = raw
        .categories
        .into_iter()
        .map(|c| c.trim().to_owned())
        .filter(|c| !c.is_empty())
        .collect();
    let before = categories.len();
    categories.sort();
    categories.dedup();
    if categories.is_empty() {
        return Err(RejectReason::MissingCategories);
    }
    repairs.categories_deduplicated = categories.len() != before;

    let mut countries = Vec::with_capacity(raw.countries.len());
    for name in &raw.countries {
        match CountryCode::normalize(name) {
            Some(code) => {
                if code.as_str() != name {
                    repairs.countries_normalized = true;
                }
                countries.push(code);
            }
            None => repairs.countries_dropped += 1,
        }
    }
    let before = countries.len();
    countries.sort();
    countries.dedup();
    if countries.len() != before {
        repairs.countries_normalized = true;
    }

    let document_type = match raw.doc_type.as_deref() {
        Some(tag) => {
            let (doc_type, canonical) = DocumentType::normalize(tag);
            repairs.document_type_mapped = !canonical;
            doc_type
        }
        None => {
            repairs.document_type_mapped = true;
            DocumentType::Other
        }
    };

    let mut references = Vec::with_capacity(raw.refs.len());
    for r in raw.refs {
        let key = key_from_parts(r.author.as_deref(), r.year, r.volume.as_ref(), r.page.as_ref());
        let resolved_id = r.id.filter(|id| !id.trim().is_empty());
        if resolved_id.is_none() && key.is_none() {
            repairs.references_dropped += 1;
            continue;
        }
        references.push(ReferenceEntry { resolved_id, match_key: key.map(Box::new) });
    }

    let match_key =
        key_from_parts(raw.author.as_deref(), raw.year, raw.volume.as_ref(), raw.page.as_ref())
            .map(Box::new);

    Ok((
        ArticleRecord {
            id,
            publication_year,
            document_type,
            subject_categories: categories,
            countries,
            references,
            match_key,
        },
        repairs,
    ))
}

// ---------------------------------------------------------------------------
// Corpus

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based input line number.
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionStats {
    /// References that carry a match key and a resolved id.
    pub resolved_by_key: u64,
    /// Unresolved references whose key matched two or more articles.
    pub ambiguous: u64,
    /// Unresolved references whose key matched nothing.
    pub unmatched: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub total_lines: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub repaired: usize,
    pub rejections: Vec<Rejection>,
    pub countries_dropped: u64,
    pub references_dropped: u64,
    /// Resolved ids that name no article in the corpus.
    pub dangling_references: u64,
    pub resolution: ResolutionStats,
}

/// An immutable, id-indexed article collection.
///
/// Articles are stored sorted by id, so positional indices order the same way
/// ids do. Equality compares the article set only; ingest statistics depend
/// on line order and are not part of a corpus' identity.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    articles: Vec<ArticleRecord>,
    index: HashMap<String, u32>,
    stats: IngestStats,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.articles == other.articles
    }
}

impl Corpus {
    /// Builds a corpus from already-validated records.
    pub fn from_records(mut articles: Vec<ArticleRecord>) -> Result<Self, IngestError> {
        articles.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = articles.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(IngestError::DuplicateId(w[0].id.clone()));
        }
        let stats = IngestStats {
            total_lines: articles.len(),
            accepted: articles.len(),
            ..IngestStats::default()
        };
        Ok(Self::assemble(articles, stats))
    }

    fn assemble(articles: Vec<ArticleRecord>, mut stats: IngestStats) -> Self {
        assert!(articles.len() < u32::MAX as usize, "corpus too large for u32 indices");
        let index: HashMap<String, u32> =
            articles.iter().enumerate().map(|(i, a)| (a.id.clone(), i as u32)).collect();
        stats.dangling_references = articles
            .par_iter()
            .map(|a| {
                a.references
                    .iter()
                    .filter_map(|r| r.resolved_id.as_deref())
                    .filter(|id| !index.contains_key(*id))
                    .count() as u64
            })
            .sum();
        Self { articles, index, stats }
    }

    pub fn articles(&self) -> &[ArticleRecord] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn get(&self, id: &str) -> Option<&ArticleRecord> {
        self.index_of(id).map(|i| &self.articles[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }
}

/// Splits on `\n`, tolerating `\r\n`; a trailing newline does not start a line.
fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect()
}

enum LineOutcome {
    Accepted(ArticleRecord, Repairs),
    Rejected(RejectReason),
}

fn parse_line(line: &str, options: &IngestOptions) -> LineOutcome {
    if line.trim().is_empty() {
        return LineOutcome::Rejected(RejectReason::BlankLine);
    }
    let raw: RawRecord = match serde_json::from_str(line) {
        Ok(raw) => raw,
        Err(_) => return LineOutcome::Rejected(RejectReason::MalformedRecord),
    };
    match validate_record(raw, options) {
        Ok((record, repairs)) => LineOutcome::Accepted(record, repairs),
        Err(reason) => LineOutcome::Rejected(reason),
    }
}

/// Parses a whole line-delimited corpus held in memory.
///
/// Lines are parsed in parallel and merged in line order; the first record
/// with a given id wins and later ones are rejected as duplicates.
pub fn parse_corpus_str(text: &str, options: &IngestOptions) -> Corpus {
    let lines = split_lines(text);
    let outcomes: Vec<LineOutcome> =
        lines.par_iter().with_min_len(1024).map(|line| parse_line(line, options)).collect();

    let mut stats = IngestStats { total_lines: lines.len(), ..IngestStats::default() };
    let mut seen: HashSet<&str> = HashSet::with_capacity(outcomes.len());
    let mut keep = vec![false; outcomes.len()];
    for (i, outcome) in outcomes.iter().enumerate() {
        match outcome {
            LineOutcome::Accepted(record, repairs) => {
                if seen.insert(record.id.as_str()) {
                    keep[i] = true;
                    stats.accepted += 1;
                    if repairs.any() {
                        stats.repaired += 1;
                    }
                    stats.countries_dropped += u64::from(repairs.countries_dropped);
                    stats.references_dropped += u64::from(repairs.references_dropped);
                } else {
                    stats.rejections.push(Rejection { line: i + 1, reason: RejectReason::DuplicateId });
                }
            }
            LineOutcome::Rejected(reason) => {
                stats.rejections.push(Rejection { line: i + 1, reason: *reason });
            }
        }
    }
    drop(seen);
    stats.rejected = stats.rejections.len();

    let articles: Vec<ArticleRecord> = outcomes
        .into_iter()
        .zip(keep)
        .filter_map(|(o, k)| match o {
            LineOutcome::Accepted(record, _) if k => Some(record),
            _ => None,
        })
        .collect();
    let mut articles = articles;
    articles.par_sort_unstable_by(|a, b| a.id.cmp(&b.id));
    Corpus::assemble(articles, stats)
}

/// Reads and parses a line-delimited corpus.
pub fn parse_corpus<R: Read>(mut input: R, options: &IngestOptions) -> Result<Corpus, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError::Utf8(e.utf8_error().valid_up_to()))?;
    Ok(parse_corpus_str(&text, options))
}

enum KeyHit {
    One(u32),
    Many,
}

/// Resolves match-keyed references by exact key equality.
///
/// A key naming exactly one article resolves to it; ambiguous and unmatched
/// keys stay unresolved. Idempotent.
pub fn resolve_references(mut corpus: Corpus) -> Corpus {
    let mut by_key: HashMap<&MatchKey, KeyHit> = HashMap::new();
    for (i, article) in corpus.articles.iter().enumerate() {
        if let Some(key) = article.match_key.as_deref() {
            by_key
                .entry(key)
                .and_modify(|hit| *hit = KeyHit::Many)
                .or_insert(KeyHit::One(i as u32));
        }
    }
    let targets: Vec<Vec<(usize, Option<u32>, bool)>> = corpus
        .articles
        .par_iter()
        .map(|article| {
            article
                .references
                .iter()
                .enumerate()
                .filter(|(_, r)| r.resolved_id.is_none())
                .filter_map(|(j, r)| {
                    let key = r.match_key.as_deref()?;
                    Some(match by_key.get(key) {
                        Some(KeyHit::One(t)) => (j, Some(*t), false),
                        Some(KeyHit::Many) => (j, None, true),
                        None => (j, None, false),
                    })
                })
                .collect()
        })
        .collect();
    drop(by_key);

    let mut resolution = ResolutionStats::default();
    for (i, hits) in targets.into_iter().enumerate() {
        for (j, target, ambiguous) in hits {
            match target {
                Some(t) => {
                    let id = corpus.articles[t as usize].id.clone();
                    corpus.articles[i].references[j].resolved_id = Some(id);
                }
                None if ambiguous => resolution.ambiguous += 1,
                None => resolution.unmatched += 1,
            }
        }
    }
    resolution.resolved_by_key = corpus
        .articles
        .iter()
        .flat_map(|a| &a.references)
        .filter(|r| r.match_key.is_some() && r.resolved_id.is_some())
        .count() as u64;
    corpus.stats.resolution = resolution;
    corpus
}
