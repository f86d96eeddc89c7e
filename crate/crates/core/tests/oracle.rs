use refgeo_core::indicators::{DomesticCounting, DomesticMode};
use refgeo_core::pipeline;
use refgeo_core::synth::{generate_corpus, oracle_indicators, SynthParams};
use refgeo_core::{RunConfig, TiePolicy};

#[test]
fn pipeline_matches_oracle_on_small_corpora() {
    for seed in 0..4u64 {
        let params = SynthParams { seed, n_articles: 400 + 300 * seed as usize, ..SynthParams::default() };
        let corpus = generate_corpus(&params).unwrap();
        let config = RunConfig {
            tie_policy: if seed % 2 == 0 { TiePolicy::IncludeTies } else { TiePolicy::StrictRank },
            domestic_mode: if seed < 2 { DomesticMode::AllElite } else { DomesticMode::PurelyDomesticElite },
            domestic_counting: if seed == 3 { DomesticCounting::Fractional } else { DomesticCounting::Full },
            elite_fraction: 0.05,
            lag_years: (seed % 3) as u32,
            ..RunConfig::default()
        };
        let fast = pipeline::run(&corpus, &config).unwrap();
        let slow = oracle_indicators(&corpus, &config);
        assert_eq!(fast.diff(&slow, 1e-9), Vec::<String>::new(), "seed {seed}");
        assert_eq!(fast.display_diff(&slow), Vec::<String>::new(), "seed {seed}");
    }
}
