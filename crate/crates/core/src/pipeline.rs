//! End-to-end indicator computation over a resolved corpus.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bundle::{
    DomesticRow, EliteRow, IndicatorBundle, RatioRow, SeriesRow, SmoothedRow, SmoothedSeries, SummaryRow,
    ThresholdRow,
};
use crate::citegraph::{cell_partition, elite_select, invert_citations, EliteSet, FractionOutOfRange};
use crate::config::RunConfig;
use crate::corpus::Corpus;
use crate::indicators::{
    aggregate_ratios, domestic_ratio, lagged_ratio_series, moving_average, publication_share_series,
    ratio_summary, share_ci, yearly_share_series,
};
use crate::refgeo::{country_threshold_filter, extract_references, share_table, ExtractOptions, ShareOrder};

pub fn select_elite(corpus: &Corpus, config: &RunConfig) -> Result<EliteSet, FractionOutOfRange> {
    let counts = invert_citations(corpus, config.citation_window);
    let cells = cell_partition(corpus);
    elite_select(corpus, &cells, &counts, config.elite_fraction, config.tie_policy)
}

/// Elite selection followed by every downstream indicator.
pub fn run(corpus: &Corpus, config: &RunConfig) -> Result<IndicatorBundle, FractionOutOfRange> {
    let elite = select_elite(corpus, config)?;
    Ok(indicators_from_elite(corpus, &elite, config))
}

/// Elite members in id order.
pub fn elite_rows(elite: &EliteSet) -> Vec<EliteRow> {
    elite.members.iter().map(|(id, cells)| EliteRow { id: id.clone(), cells: cells.clone() }).collect()
}

/// Per-cell selection details in cell order.
pub fn threshold_rows(elite: &EliteSet) -> Vec<ThresholdRow> {
    elite
        .cell_thresholds
        .iter()
        .map(|(cell, t)| ThresholdRow {
            cell: cell.clone(),
            size: t.size,
            quota: t.quota,
            threshold: t.threshold,
            selected: t.selected,
        })
        .collect()
}

/// All indicators for a given elite set.
pub fn indicators_from_elite(corpus: &Corpus, elite: &EliteSet, config: &RunConfig) -> IndicatorBundle {
    let options = ExtractOptions { exclude_self_references: config.exclude_self_references };
    let (refs, removal) = extract_references(elite, corpus, options);

    let ref_series = yearly_share_series(&refs);
    let pub_series = publication_share_series(corpus);
    let ref_total = ref_series.total();
    let pub_total = pub_series.total();
    let focus = country_threshold_filter(&pub_total, config.min_pub_share_pct);

    let mut yearly_shares = Vec::new();
    for (year, tally) in ref_series.iter() {
        for country in tally.countries() {
            let ci = share_ci(tally, country, config.ci_level, config.ci_counting)
                .expect("a present country has a non-empty year");
            yearly_shares.push(SeriesRow { country, year, share_pct: tally.fractional_share(country), ci });
        }
    }
    yearly_shares.sort_by(|a, b| a.country.cmp(&b.country).then(a.year.cmp(&b.year)));

    let lagged = lagged_ratio_series(&ref_series, &pub_series, config.lag_years, &focus);
    let ratios = lagged
        .series
        .iter()
        .flat_map(|(country, years)| {
            years.iter().map(move |(year, p)| RatioRow {
                country: *country,
                year: *year,
                pub_year: p.pub_year,
                ref_share_pct: p.ref_share,
                pub_share_pct: p.pub_share,
                ratio: p.ratio,
            })
        })
        .collect();
    let ratio_values = lagged.ratios();
    let summary = ratio_summary(&ratio_values)
        .by_rank()
        .into_iter()
        .map(|(country, s)| SummaryRow {
            country,
            mean: s.mean,
            rank_mean: s.rank_mean,
            sd: s.sd,
            rank_sd: s.rank_sd,
            delta: s.delta,
            rank_delta: s.rank_delta,
            class: s.class,
        })
        .collect();

    let domestic_series: Vec<_> = focus
        .par_iter()
        .map(|&country| {
            let series = domestic_ratio(
                country,
                corpus,
                &refs,
                &pub_series,
                config.domestic_mode,
                config.domestic_counting,
                config.lag_years,
            );
            (country, series)
        })
        .collect();
    let mut domestic = Vec::new();
    let mut domestic_omitted = 0;
    let mut domestic_values: BTreeMap<_, BTreeMap<i32, f64>> = BTreeMap::new();
    for (country, series) in &domestic_series {
        domestic_omitted += series.omitted;
        for (year, p) in &series.points {
            domestic.push(DomesticRow {
                country: *country,
                year: *year,
                pub_year: p.pub_year,
                qualifying_refs: p.qualifying_refs,
                domestic_refs: p.domestic_refs,
                domestic_share: p.domestic_share,
                pub_share: p.pub_share,
                ratio: p.ratio,
            });
            domestic_values.entry(*country).or_default().insert(*year, p.ratio);
        }
    }
    domestic.sort_by(|a, b| a.country.cmp(&b.country).then(a.year.cmp(&b.year)));

    let mut smoothed = Vec::new();
    for (kind, values) in [(SmoothedSeries::Lagged, &ratio_values), (SmoothedSeries::Domestic, &domestic_values)] {
        for (country, series) in values {
            let averaged = moving_average(series, config.moving_average_window);
            for ((year, value), ma) in series.iter().zip(averaged.values()) {
                smoothed.push(SmoothedRow { series: kind, country: *country, year: *year, value: *value, moving_average: *ma });
            }
        }
    }

    IndicatorBundle {
        elite: elite_rows(elite),
        thresholds: threshold_rows(elite),
        removal,
        article_shares: share_table(&pub_total, ShareOrder::ShareDescending),
        reference_shares: share_table(&ref_total, ShareOrder::ShareDescending),
        aggregate_ratios: aggregate_ratios(&ref_total, &pub_total, &focus),
        focus_countries: focus,
        yearly_shares,
        ratios,
        ratios_omitted: lagged.omitted,
        summary,
        domestic,
        domestic_omitted,
        smoothed,
    }
}
