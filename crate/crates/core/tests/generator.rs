use refgeo_core::pipeline;
use refgeo_core::synth::{generate_corpus, generate_jsonl, SynthParams};
use refgeo_core::RunConfig;

#[test]
fn preferential_attachment_concentrates_citations() {
    for seed in 1..=5 {
        let base = SynthParams { seed, n_articles: 3000, ..SynthParams::default() };
        let uniform = generate_jsonl(&SynthParams { attachment_exponent: 0.0, ..base.clone() }).unwrap().1;
        let linear = generate_jsonl(&SynthParams { attachment_exponent: 1.0, ..base.clone() }).unwrap().1;
        let steep = generate_jsonl(&SynthParams { attachment_exponent: 1.5, ..base }).unwrap().1;
        assert!(linear.max_in_degree >= uniform.max_in_degree, "seed {seed}: {linear:?} vs {uniform:?}");
        assert!(steep.max_in_degree >= linear.max_in_degree, "seed {seed}");
    }
}

#[test]
fn injected_noise_is_removed_at_the_configured_rate() {
    let params = SynthParams { seed: 99, n_articles: 20_000, attachment_exponent: 0.0, ..SynthParams::default() };
    let corpus = generate_corpus(&params).unwrap();
    let config = RunConfig { elite_fraction: 0.1, ..RunConfig::default() };
    let removal = pipeline::run(&corpus, &config).unwrap().removal;

    let expected = params.non_article_fraction
        + params.pre_1980_fraction
        + (1.0 - params.non_article_fraction - params.pre_1980_fraction) * params.missing_country_fraction;
    let n = (removal.total_before - removal.unresolved) as f64;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    let observed = removal.typed_removal_pct / 100.0;
    assert!(n > 5000.0, "too few references: {n}");
    assert!((observed - expected).abs() < 5.0 * sigma, "observed {observed}, expected {expected} ± {sigma}");
    assert_eq!(removal.unresolved, 0);
}
