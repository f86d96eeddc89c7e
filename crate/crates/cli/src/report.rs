//! CSV and JSON artifact writers.
//!
//! Every CSV is UTF-8 with LF line endings and RFC 4180 quoting. Numeric cells
//! are written unrounded with at most nine fractional digits; each table also
//! has a `*_display.csv` twin rounded to two decimals.

use std::fs;
use std::io;
use std::path::Path;

use refgeo_core::bundle::{round2, EliteRow, IndicatorBundle, ThresholdRow};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
    Empty,
}

impl Cell {
    fn exact(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Empty => String::new(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Real(x) => format_display(*x),
            other => other.exact(),
        }
    }
}

fn text(s: impl ToString) -> Cell {
    Cell::Text(s.to_string())
}

fn int(i: impl TryInto<i64>) -> Cell {
    Cell::Int(i.try_into().unwrap_or(i64::MAX))
}

/// Up to nine fractional digits, trailing zeros trimmed.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

/// Two decimals, half away from zero.
pub fn format_display(x: f64) -> String {
    let s = format!("{:.2}", round2(x));
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; written as `<name>.csv` and `<name>_display.csv`.
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub display_variant: bool,
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    fs::write(path, bytes)
}

impl Table {
    /// Writes the table (and its display twin); returns the file names written.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<String>> {
        let exact = format!("{}.csv", self.name);
        write_csv(&dir.join(&exact), self.header, self.rows.iter().map(|r| r.iter().map(Cell::exact).collect()))?;
        let mut written = vec![exact];
        if self.display_variant {
            let display = format!("{}_display.csv", self.name);
            write_csv(&dir.join(&display), self.header, self.rows.iter().map(|r| r.iter().map(Cell::display).collect()))?;
            written.push(display);
        }
        Ok(written)
    }
}

pub const SHARE_HEADER: &[&str] = &["country", "full_count", "fractional_count", "fractional_share_pct"];
pub const SUMMARY_HEADER: &[&str] = &["country", "mean", "rank_mean", "sd", "rank_sd", "delta", "rank_delta", "class"];

pub fn elite_table(elite: &[EliteRow]) -> Table {
    Table {
        name: "elite",
        header: &["article_id", "cells"],
        rows: elite
            .iter()
            .map(|e| {
                let cells: Vec<String> = e.cells.iter().map(ToString::to_string).collect();
                vec![text(&e.id), text(cells.join(","))]
            })
            .collect(),
        display_variant: false,
    }
}

pub fn threshold_table(thresholds: &[ThresholdRow]) -> Table {
    Table {
        name: "elite_thresholds",
        header: &["category", "year", "cell_size", "quota", "threshold", "selected"],
        rows: thresholds
            .iter()
            .map(|t| {
                vec![text(&t.cell.category), int(t.cell.year), int(t.size), int(t.quota), int(t.threshold), int(t.selected)]
            })
            .collect(),
        display_variant: false,
    }
}

fn share_table(name: &'static str, rows: &[refgeo_core::refgeo::ShareRow]) -> Table {
    Table {
        name,
        header: SHARE_HEADER,
        rows: rows
            .iter()
            .map(|r| {
                vec![text(r.country), int(r.full_count), Cell::Real(r.fractional_count), Cell::Real(r.fractional_share_pct)]
            })
            .collect(),
        display_variant: true,
    }
}

pub fn article_share_table(bundle: &IndicatorBundle) -> Table {
    share_table("table1", &bundle.article_shares)
}

pub fn reference_share_table(bundle: &IndicatorBundle) -> Table {
    share_table("table2", &bundle.reference_shares)
}

pub fn series_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "fig1_series",
        header: &["country", "year", "share_pct", "lower", "point", "upper"],
        rows: bundle
            .yearly_shares
            .iter()
            .map(|r| {
                vec![
                    text(r.country),
                    int(r.year),
                    Cell::Real(r.share_pct),
                    Cell::Real(r.ci.lower),
                    Cell::Real(r.ci.point),
                    Cell::Real(r.ci.upper),
                ]
            })
            .collect(),
        display_variant: true,
    }
}

pub fn ratio_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "fig2_ratios",
        header: &["country", "year", "pub_year", "ref_share_pct", "pub_share_pct", "ratio"],
        rows: bundle
            .ratios
            .iter()
            .map(|r| {
                vec![
                    text(r.country),
                    int(r.year),
                    int(r.pub_year),
                    Cell::Real(r.ref_share_pct),
                    Cell::Real(r.pub_share_pct),
                    Cell::Real(r.ratio),
                ]
            })
            .collect(),
        display_variant: true,
    }
}

pub fn summary_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "table3_summary",
        header: SUMMARY_HEADER,
        rows: bundle
            .summary
            .iter()
            .map(|s| {
                vec![
                    text(s.country),
                    Cell::Real(s.mean),
                    int(s.rank_mean),
                    s.sd.map_or(Cell::Empty, Cell::Real),
                    int(s.rank_sd),
                    Cell::Real(s.delta),
                    int(s.rank_delta),
                    text(s.class),
                ]
            })
            .collect(),
        display_variant: true,
    }
}

pub fn aggregate_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "aggregate_ratios",
        header: &["country", "ref_share_pct", "pub_share_pct", "ratio"],
        rows: bundle
            .aggregate_ratios
            .iter()
            .map(|a| vec![text(a.country), Cell::Real(a.ref_share), Cell::Real(a.pub_share), Cell::Real(a.ratio)])
            .collect(),
        display_variant: true,
    }
}

pub fn domestic_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "table4_domestic",
        header: &["country", "year", "pub_year", "qualifying_refs", "domestic_refs", "domestic_share", "pub_share", "ratio"],
        rows: bundle
            .domestic
            .iter()
            .map(|d| {
                vec![
                    text(d.country),
                    int(d.year),
                    int(d.pub_year),
                    int(d.qualifying_refs),
                    int(d.domestic_refs),
                    Cell::Real(d.domestic_share),
                    Cell::Real(d.pub_share),
                    Cell::Real(d.ratio),
                ]
            })
            .collect(),
        display_variant: true,
    }
}

pub fn smoothed_table(bundle: &IndicatorBundle) -> Table {
    Table {
        name: "fig3_smoothed",
        header: &["series", "country", "year", "value", "moving_average"],
        rows: bundle
            .smoothed
            .iter()
            .map(|s| {
                vec![text(s.series.as_str()), text(s.country), int(s.year), Cell::Real(s.value), Cell::Real(s.moving_average)]
            })
            .collect(),
        display_variant: true,
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(1.0 / 3.0), "0.333333333");
        assert_eq!(format_real(-0.0000000001), "0");
        assert_eq!(format_real(66.66666666666667), "66.666666667");
        assert_eq!(format_display(66.66666666666667), "66.67");
        assert_eq!(format_display(2.345), "2.35");
        assert_eq!(format_display(-0.001), "0.00");
    }

    #[test]
    fn csv_quoting_and_lf() {
        let dir = tempfile::tempdir().unwrap();
        let table = Table {
            name: "t",
            header: &["a", "b"],
            rows: vec![vec![text("x,y"), Cell::Real(0.125)], vec![text("say \"hi\""), Cell::Empty]],
            display_variant: true,
        };
        assert_eq!(table.write(dir.path()).unwrap(), ["t.csv", "t_display.csv"]);
        let exact = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(exact, "a,b\n\"x,y\",0.125\n\"say \"\"hi\"\"\",\n");
        let display = fs::read_to_string(dir.path().join("t_display.csv")).unwrap();
        assert_eq!(display, "a,b\n\"x,y\",0.13\n\"say \"\"hi\"\"\",\n");
    }
}
