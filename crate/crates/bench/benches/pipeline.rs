use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use refgeo_core::citegraph::{cell_partition, elite_select, invert_citations, YearWindow};
use refgeo_core::corpus::{parse_corpus_str, resolve_references, IngestOptions};
use refgeo_core::pipeline;
use refgeo_core::refgeo::{extract_references, ExtractOptions};
use refgeo_core::synth::{generate_jsonl, oracle_indicators, SynthParams};
use refgeo_core::{RunConfig, TiePolicy};

const ARTICLES: usize = 20_000;

fn corpus_text() -> String {
    generate_jsonl(&SynthParams { seed: 42, n_articles: ARTICLES, ..SynthParams::default() }).unwrap().0
}

fn ingest(c: &mut Criterion) {
    let text = corpus_text();
    let mut group = c.benchmark_group("ingest");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.sample_size(10);
    group.bench_function("parse", |b| b.iter(|| parse_corpus_str(&text, &IngestOptions::default())));
    let parsed = parse_corpus_str(&text, &IngestOptions::default());
    group.bench_function("resolve", |b| {
        b.iter_batched(|| parsed.clone(), resolve_references, BatchSize::LargeInput)
    });
    group.finish();
}

fn citations(c: &mut Criterion) {
    let corpus = resolve_references(parse_corpus_str(&corpus_text(), &IngestOptions::default()));
    let mut group = c.benchmark_group("citegraph");
    group.sample_size(20);
    group.bench_function("invert", |b| b.iter(|| invert_citations(&corpus, YearWindow::OPEN)));
    let counts = invert_citations(&corpus, YearWindow::OPEN);
    let cells = cell_partition(&corpus);
    for policy in [TiePolicy::IncludeTies, TiePolicy::StrictRank] {
        group.bench_function(format!("elite/{policy:?}"), |b| {
            b.iter(|| elite_select(&corpus, &cells, &counts, 0.01, policy).unwrap())
        });
    }
    group.finish();
}

fn indicators(c: &mut Criterion) {
    let corpus = resolve_references(parse_corpus_str(&corpus_text(), &IngestOptions::default()));
    let config = RunConfig::default();
    let elite = pipeline::select_elite(&corpus, &config).unwrap();
    let mut group = c.benchmark_group("indicators");
    group.sample_size(20);
    group.bench_function("extract", |b| b.iter(|| extract_references(&elite, &corpus, ExtractOptions::default())));
    group.bench_function("from_elite", |b| b.iter(|| pipeline::indicators_from_elite(&corpus, &elite, &config)));
    group.bench_function("full_run", |b| b.iter(|| pipeline::run(&corpus, &config).unwrap()));
    group.sample_size(10);
    group.bench_function("oracle", |b| b.iter(|| oracle_indicators(&corpus, &config)));
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth");
    group.sample_size(10);
    for exponent in [0.0, 1.0] {
        let params = SynthParams { seed: 7, n_articles: ARTICLES, attachment_exponent: exponent, ..SynthParams::default() };
        group.bench_function(format!("generate/exponent={exponent}"), |b| b.iter(|| generate_jsonl(&params).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ingest, citations, indicators, generation);
criterion_main!(benches);
