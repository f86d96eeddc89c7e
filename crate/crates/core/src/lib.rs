//! Backward-citation geography engine.
//!
//! The crate ingests a line-delimited bibliographic corpus, selects the most
//! highly cited articles per (subject category, publication year) cell, follows
//! their reference lists back to the cited articles, and measures how much
//! each country contributes to that cited archive relative to its share of
//! published articles.
//!
//! Stages, in pipeline order:
//!
//! * [`corpus`]: record model, ingestion, and exact-key reference resolution.
//! * [`citegraph`]: cited-by inversion, cell partition, percentile selection.
//! * [`refgeo`]: reference cleaning and fractional country tallies.
//! * [`indicators`]: yearly shares, confidence intervals, lagged ratios,
//!   summaries, moving averages, and the domestic decomposition.
//! * [`pipeline`]: runs all of the above into an [`IndicatorBundle`].
//! * [`synth`]: seeded corpus generator and a brute-force reference oracle.

pub mod bundle;
pub mod citegraph;
pub mod config;
pub mod corpus;
pub mod country;
pub mod indicators;
pub mod pipeline;
pub mod refgeo;
pub mod synth;

pub use bundle::IndicatorBundle;
pub use citegraph::{CellKey, CitationCounts, EliteSet, TiePolicy};
pub use config::{ConfigError, RunConfig};
pub use corpus::{ArticleRecord, Corpus, DocumentType, IngestError, IngestStats, ReferenceEntry};
pub use country::CountryCode;
pub use indicators::{ConfidenceInterval, PerformerClass, RatioReport, ShareSeries};
pub use refgeo::{CountryTally, RefInstance, RemovalStats};
