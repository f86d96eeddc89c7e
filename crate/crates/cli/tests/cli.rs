use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refgeo_cli::stages::bundle_digest;
use refgeo_cli::{RunMeta, StageMeta};

const BIN: &str = env!("CARGO_BIN_EXE_refgeo");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/ten_articles.jsonl")
}

fn refgeo(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("REFGEO_WORKERS").output().expect("binary runs")
}

fn stage(name: &str, input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![name, "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    refgeo(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `dir` except `run_meta.json`, relative path → bytes.
fn tables(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "run_meta.json" {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn stage_before_its_upstream_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = stage("elite", &fixture(), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("ingest-check.json"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = stage("all", &dir.path().join("absent.jsonl"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_3_with_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"citation_window": {"from": "early"}}"#).unwrap();
    let o = stage("all", &fixture(), dir.path(), &["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("citation_window.from"), "{}", stderr(&o));

    fs::write(&config, r#"{"elite_fraction": 0}"#).unwrap();
    let o = stage("all", &fixture(), dir.path(), &["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("elite_fraction"));
}

#[test]
fn changed_config_or_tampered_artifact_is_stale() {
    let dir = tempfile::tempdir().unwrap();
    assert!(stage("all", &fixture(), dir.path(), &[]).status.success());

    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"lag_years": 2}"#).unwrap();
    let o = stage("shares", &fixture(), dir.path(), &["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    fs::write(dir.path().join("elite.csv"), "article_id,cells\n").unwrap();
    let o = stage("shares", &fixture(), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("elite.csv"));
}

#[test]
fn all_equals_the_five_stages_in_order() {
    let staged = tempfile::tempdir().unwrap();
    for name in ["ingest-check", "elite", "shares", "ratios", "domestic"] {
        let o = stage(name, &fixture(), staged.path(), &[]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
    let chained = tempfile::tempdir().unwrap();
    assert!(stage("all", &fixture(), chained.path(), &[]).status.success());
    assert_eq!(tables(staged.path()), tables(chained.path()));

    let run: RunMeta = serde_json::from_slice(&fs::read(chained.path().join("run_meta.json")).unwrap()).unwrap();
    let metas: Vec<StageMeta> = ["ingest-check", "elite", "shares", "ratios", "domestic"]
        .iter()
        .map(|s| serde_json::from_slice(&fs::read(staged.path().join(format!("meta/{s}.json"))).unwrap()).unwrap())
        .collect();
    assert_eq!(bundle_digest(&metas), run.bundle_sha256);
}

#[test]
fn repeated_runs_match_except_run_meta() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(stage("all", &fixture(), a.path(), &[]).status.success());
    assert!(stage("all", &fixture(), b.path(), &[]).status.success());
    assert_eq!(tables(a.path()), tables(b.path()));
}

#[test]
fn empty_corpus_yields_header_only_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    fs::write(&input, "").unwrap();
    let out = dir.path().join("out");
    let o = stage("all", &input, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "table1.csv",
        "table2.csv",
        "fig1_series.csv",
        "fig2_ratios.csv",
        "table3_summary.csv",
        "fig3_smoothed.csv",
        "table4_domestic.csv",
        "aggregate_ratios.csv",
        "elite.csv",
    ] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(text.lines().count(), 1, "{name}");
    }
    assert_eq!(
        fs::read_to_string(out.join("table3_summary.csv")).unwrap(),
        "country,mean,rank_mean,sd,rank_sd,delta,rank_delta,class\n"
    );
    assert!(out.join("removal_stats.json").exists() && out.join("run_meta.json").exists());
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let o = refgeo(&["synth", "--seed", "7", "--n", "1000", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert!(bytes.iter().filter(|&&c| c == b'\n').count() > 1000);
}

#[test]
fn synth_reads_params_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    fs::write(&params, r#"{"seed": 3, "n_articles": 50, "mean_references": 2}"#).unwrap();
    let out = dir.path().join("c.jsonl");
    let o = refgeo(&["synth", "--config", params.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(stats["records"].as_u64().unwrap() >= 50);

    fs::write(&params, r#"{"collaboration_probability": 3}"#).unwrap();
    let o = refgeo(&["synth", "--config", params.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("collaboration_probability"));
}

#[test]
fn worker_count_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["all", "--input", fixture().to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("REFGEO_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let run: RunMeta = serde_json::from_slice(&fs::read(dir.path().join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(run.workers, 3);
}
