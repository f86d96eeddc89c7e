//! Share tables rebuilt from published country totals.

use refgeo_core::bundle::round2;
use refgeo_core::refgeo::{country_threshold_filter, share_rows, share_table, ShareOrder};
use refgeo_core::{CountryCode, CountryTally};

/// Fractionally counted article totals of the 21 largest producers with
/// their published two-decimal shares.
const ARTICLES: &[(&str, f64, f64)] = &[
    ("US", 2_634_682.58, 24.02),
    ("CN", 1_080_633.73, 9.85),
    ("JP", 642_650.14, 5.86),
    ("GB", 610_480.36, 5.57),
    ("DE", 588_873.30, 5.37),
    ("FR", 415_985.78, 3.79),
    ("CA", 368_465.44, 3.36),
    ("IT", 348_992.92, 3.18),
    ("IN", 324_676.10, 2.96),
    ("KR", 309_488.83, 2.82),
    ("ES", 302_138.84, 2.75),
    ("AU", 260_940.89, 2.38),
    ("BR", 233_401.27, 2.13),
    ("RU", 212_192.69, 1.93),
    ("TW", 192_525.35, 1.76),
    ("NL", 186_951.06, 1.70),
    ("TR", 178_076.95, 1.62),
    ("PL", 140_765.21, 1.28),
    ("SE", 126_237.57, 1.15),
    ("CH", 122_881.07, 1.12),
    ("IR", 122_174.78, 1.11),
];

/// World total implied by the largest producer's count and share.
const WORLD_ARTICLES: u64 = 10_968_704;

fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

#[test]
fn threshold_admits_exactly_the_large_producers() {
    let mut tally = CountryTally::new();
    let mut listed = 0;
    for (code, count, _) in ARTICLES {
        let c = [cc(code)];
        let n = count.round() as u64;
        for _ in 0..n {
            tally.add(&c).unwrap();
        }
        listed += n;
    }
    // The remaining world output, spread over producers below 1% each.
    let rest = WORLD_ARTICLES - listed;
    let small: Vec<CountryCode> = (b'A'..=b'P').map(|b| cc(&format!("Q{}", b as char))).collect();
    for (i, c) in small.iter().enumerate() {
        let share = rest / small.len() as u64 + u64::from((i as u64) < rest % small.len() as u64);
        for _ in 0..share {
            tally.add(std::slice::from_ref(c)).unwrap();
        }
    }
    assert_eq!(tally.items(), WORLD_ARTICLES);

    let admitted = country_threshold_filter(&tally, 1.0);
    let expected: Vec<CountryCode> = ARTICLES.iter().map(|(c, _, _)| cc(c)).collect();
    assert_eq!(admitted, expected);

    let rows = share_table(&tally, ShareOrder::ShareDescending);
    for ((code, _, share), row) in ARTICLES.iter().zip(&rows) {
        assert_eq!(row.country, cc(code));
        assert_eq!(round2(row.fractional_share_pct), *share, "{code}");
    }
    assert!(rows[21..].iter().all(|r| r.fractional_share_pct < 1.0));
}

#[test]
fn cross_row_ratio_matches_published_shares() {
    let us = 1_403_550.91;
    let cn = 134_969.53;
    let total = us / 0.4410;
    let rows = share_rows(vec![(cc("US"), 0, us), (cc("CN"), 0, cn)], total, ShareOrder::ShareDescending);
    assert_eq!(round2(rows[0].fractional_share_pct), 44.10);
    assert_eq!(round2(rows[1].fractional_share_pct), 4.24);
    let computed = rows[0].fractional_share_pct / rows[1].fractional_share_pct;
    assert!((computed - us / cn).abs() < 1e-9);
    assert!((computed - 44.10 / 4.24).abs() < 0.01);
}
