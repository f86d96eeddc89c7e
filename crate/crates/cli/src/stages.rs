//! Pipeline stages and their on-disk artifacts.
//!
//! Each stage writes its tables into the output directory plus a
//! `meta/<stage>.json` record holding the config hash, the input hash and the
//! SHA-256 of every file it wrote. A stage refuses to run when its upstream
//! record is missing, was produced from another input or config, or no longer
//! matches the files on disk.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use refgeo_core::citegraph::CellThreshold;
use refgeo_core::corpus::{parse_corpus, resolve_references, IngestOptions, RejectReason};
use refgeo_core::pipeline::{elite_rows, indicators_from_elite, select_elite, threshold_rows};
use refgeo_core::{CellKey, ConfigError, Corpus, EliteSet, IndicatorBundle, RunConfig};

use crate::error::CliError;
use crate::report::{self, write_json, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    IngestCheck,
    Elite,
    Shares,
    Ratios,
    Domestic,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::IngestCheck, Stage::Elite, Stage::Shares, Stage::Ratios, Stage::Domestic];

    pub fn name(self) -> &'static str {
        match self {
            Stage::IngestCheck => "ingest-check",
            Stage::Elite => "elite",
            Stage::Shares => "shares",
            Stage::Ratios => "ratios",
            Stage::Domestic => "domestic",
        }
    }

    pub fn upstream(self) -> Option<Stage> {
        match self {
            Stage::IngestCheck => None,
            Stage::Elite => Some(Stage::IngestCheck),
            Stage::Shares => Some(Stage::Elite),
            Stage::Ratios => Some(Stage::Shares),
            Stage::Domestic => Some(Stage::Ratios),
        }
    }

    fn meta_path(self) -> String {
        format!("meta/{}.json", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageMeta {
    pub stage: String,
    pub config_hash: String,
    pub corpus_sha256: String,
    /// File name relative to the output directory → SHA-256.
    pub artifacts: BTreeMap<String, String>,
    pub counters: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct StageInputs {
    pub input: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::MissingInput(path.to_owned()),
        _ => CliError::Io { context: format!("reading {}", path.display()), source: e },
    })
}

/// Defaults when no file is given; a missing file counts as a missing input.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let bytes = read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::InvalidConfig {
        file: path.to_owned(),
        source: ConfigError { path: String::new(), message: "not valid UTF-8".into() },
    })?;
    RunConfig::from_json(&text).map_err(|source| CliError::InvalidConfig { file: path.to_owned(), source })
}

/// A loaded corpus plus the identity of the run.
pub struct Session {
    pub input: PathBuf,
    pub out: PathBuf,
    pub corpus: Corpus,
    pub corpus_sha256: String,
    pub config: RunConfig,
    pub config_hash: String,
}

impl Session {
    pub fn open(inputs: &StageInputs) -> Result<Self, CliError> {
        let bytes = read_input(&inputs.input)?;
        let config = load_config(inputs.config.as_deref())?;
        let corpus_sha256 = sha256_hex(&bytes);
        let options = IngestOptions { year_window: config.year_window };
        let corpus = resolve_references(parse_corpus(bytes.as_slice(), &options)?);
        let config_hash = sha256_hex(config.to_canonical_json().as_bytes());
        let meta_dir = inputs.out.join("meta");
        fs::create_dir_all(&meta_dir).map_err(CliError::io(format!("creating {}", meta_dir.display())))?;
        Ok(Self { input: inputs.input.clone(), out: inputs.out.clone(), corpus, corpus_sha256, config, config_hash })
    }

    fn read_artifact(&self, name: &str, stage: Stage) -> Result<Vec<u8>, CliError> {
        let path = self.out.join(name);
        fs::read(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => CliError::MissingArtifact { path, stage: stage.name() },
            _ => CliError::Io { context: format!("reading {}", path.display()), source: e },
        })
    }

    /// Verifies the immediate upstream stage's record and files.
    pub fn check_upstream(&self, stage: Stage) -> Result<(), CliError> {
        let Some(up) = stage.upstream() else { return Ok(()) };
        let meta_name = up.meta_path();
        let stale = |name: &str| CliError::StaleArtifact { path: self.out.join(name), stage: up.name() };
        let meta: StageMeta =
            serde_json::from_slice(&self.read_artifact(&meta_name, up)?).map_err(|_| stale(&meta_name))?;
        if meta.config_hash != self.config_hash || meta.corpus_sha256 != self.corpus_sha256 {
            return Err(stale(&meta_name));
        }
        for (name, digest) in &meta.artifacts {
            if sha256_hex(&self.read_artifact(name, up)?) != *digest {
                return Err(stale(name));
            }
        }
        Ok(())
    }

    /// Rebuilds the elite set from `elite.csv` and `elite_thresholds.csv`.
    pub fn read_elite(&self) -> Result<EliteSet, CliError> {
        let stale = |name: &str| CliError::StaleArtifact { path: self.out.join(name), stage: Stage::Elite.name() };

        let members_csv = self.read_artifact("elite.csv", Stage::Elite)?;
        let mut members = BTreeMap::new();
        for row in csv::Reader::from_reader(members_csv.as_slice()).records() {
            let row = row.map_err(|_| stale("elite.csv"))?;
            let (Some(id), Some(cells)) = (row.get(0), row.get(1)) else { return Err(stale("elite.csv")) };
            if self.corpus.get(id).is_none() {
                return Err(stale("elite.csv"));
            }
            let cells = cells.split(',').map(parse_cell).collect::<Option<Vec<_>>>().ok_or_else(|| stale("elite.csv"))?;
            members.insert(id.to_owned(), cells);
        }

        let thresholds_csv = self.read_artifact("elite_thresholds.csv", Stage::Elite)?;
        let mut cell_thresholds = BTreeMap::new();
        for row in csv::Reader::from_reader(thresholds_csv.as_slice()).records() {
            let row = row.map_err(|_| stale("elite_thresholds.csv"))?;
            let parsed = (|| {
                let cell = CellKey::new(row.get(0)?, row.get(1)?.parse().ok()?);
                let t = CellThreshold {
                    size: row.get(2)?.parse().ok()?,
                    quota: row.get(3)?.parse().ok()?,
                    threshold: row.get(4)?.parse().ok()?,
                    selected: row.get(5)?.parse().ok()?,
                };
                Some((cell, t))
            })();
            let (cell, t) = parsed.ok_or_else(|| stale("elite_thresholds.csv"))?;
            cell_thresholds.insert(cell, t);
        }

        Ok(EliteSet {
            members,
            cell_thresholds,
            fraction: self.config.elite_fraction,
            tie_policy: self.config.tie_policy,
        })
    }

    fn select_elite(&self) -> Result<EliteSet, CliError> {
        select_elite(&self.corpus, &self.config).map_err(|e| CliError::Other(e.to_string()))
    }

    /// Writes `artifacts` and the stage record; returns the record.
    fn emit(&self, stage: Stage, artifacts: Artifacts) -> Result<StageMeta, CliError> {
        let mut names = Vec::new();
        for table in &artifacts.tables {
            let written = table.write(&self.out).map_err(CliError::io(format!("writing {}", table.name)))?;
            names.extend(written);
        }
        for (name, value) in &artifacts.json {
            write_json(&self.out.join(name), value).map_err(CliError::io(format!("writing {name}")))?;
            names.push((*name).to_owned());
        }
        let mut files = BTreeMap::new();
        for name in names {
            let bytes = fs::read(self.out.join(&name)).map_err(CliError::io(format!("reading back {name}")))?;
            files.insert(name, sha256_hex(&bytes));
        }
        let meta = StageMeta {
            stage: stage.name().to_owned(),
            config_hash: self.config_hash.clone(),
            corpus_sha256: self.corpus_sha256.clone(),
            artifacts: files,
            counters: artifacts.counters,
        };
        let meta_name = stage.meta_path();
        write_json(&self.out.join(&meta_name), &meta).map_err(CliError::io(format!("writing {meta_name}")))?;
        Ok(meta)
    }
}

fn parse_cell(text: &str) -> Option<CellKey> {
    let (category, year) = text.rsplit_once(':')?;
    Some(CellKey::new(category, year.parse().ok()?))
}

#[derive(Default)]
struct Artifacts {
    tables: Vec<Table>,
    json: Vec<(&'static str, serde_json::Value)>,
    counters: BTreeMap<String, u64>,
}

const REJECTION_SAMPLE: usize = 100;

fn ingest_artifacts(session: &Session) -> Artifacts {
    let stats = session.corpus.stats();
    let mut by_reason: BTreeMap<RejectReason, u64> = BTreeMap::new();
    for r in &stats.rejections {
        *by_reason.entry(r.reason).or_default() += 1;
    }
    let report = serde_json::json!({
        "corpus_sha256": session.corpus_sha256,
        "total_lines": stats.total_lines,
        "accepted": stats.accepted,
        "rejected": stats.rejected,
        "repaired": stats.repaired,
        "rejected_by_reason": by_reason,
        "first_rejections": &stats.rejections[..stats.rejections.len().min(REJECTION_SAMPLE)],
        "countries_dropped": stats.countries_dropped,
        "references_dropped": stats.references_dropped,
        "dangling_references": stats.dangling_references,
        "resolution": stats.resolution,
    });
    let counters = BTreeMap::from([
        ("accepted".to_owned(), stats.accepted as u64),
        ("rejected".to_owned(), stats.rejected as u64),
        ("repaired".to_owned(), stats.repaired as u64),
    ]);
    Artifacts { json: vec![("ingest_report.json", report)], counters, ..Artifacts::default() }
}

fn elite_artifacts(elite: &EliteSet) -> Artifacts {
    let counters = BTreeMap::from([
        ("elite_articles".to_owned(), elite.len() as u64),
        ("cells".to_owned(), elite.cell_thresholds.len() as u64),
    ]);
    Artifacts {
        tables: vec![report::elite_table(&elite_rows(elite)), report::threshold_table(&threshold_rows(elite))],
        counters,
        ..Artifacts::default()
    }
}

fn bundle_artifacts(stage: Stage, bundle: &IndicatorBundle) -> Artifacts {
    match stage {
        Stage::Shares => Artifacts {
            tables: vec![
                report::article_share_table(bundle),
                report::reference_share_table(bundle),
                report::series_table(bundle),
            ],
            json: vec![("removal_stats.json", serde_json::to_value(bundle.removal).expect("serializable"))],
            counters: BTreeMap::from([("references".to_owned(), bundle.removal.total_after)]),
        },
        Stage::Ratios => Artifacts {
            tables: vec![report::ratio_table(bundle), report::summary_table(bundle), report::aggregate_table(bundle)],
            json: Vec::new(),
            counters: BTreeMap::from([
                ("focus_countries".to_owned(), bundle.focus_countries.len() as u64),
                ("ratio_years_omitted".to_owned(), bundle.ratios_omitted),
            ]),
        },
        Stage::Domestic => Artifacts {
            tables: vec![report::domestic_table(bundle), report::smoothed_table(bundle)],
            json: Vec::new(),
            counters: BTreeMap::from([("domestic_years_omitted".to_owned(), bundle.domestic_omitted)]),
        },
        Stage::IngestCheck | Stage::Elite => unreachable!("not a bundle stage"),
    }
}

/// Runs one stage against the artifacts already in the output directory.
pub fn run_stage(stage: Stage, inputs: &StageInputs) -> Result<StageMeta, CliError> {
    let session = Session::open(inputs)?;
    session.check_upstream(stage)?;
    match stage {
        Stage::IngestCheck => session.emit(stage, ingest_artifacts(&session)),
        Stage::Elite => {
            let elite = session.select_elite()?;
            session.emit(stage, elite_artifacts(&elite))
        }
        Stage::Shares | Stage::Ratios | Stage::Domestic => {
            let elite = session.read_elite()?;
            let bundle = indicators_from_elite(&session.corpus, &elite, &session.config);
            session.emit(stage, bundle_artifacts(stage, &bundle))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub started_unix_ms: u128,
    pub timings_ms: BTreeMap<String, u128>,
    pub workers: usize,
    pub input: String,
    pub corpus_sha256: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub stages: BTreeMap<String, StageMeta>,
    /// SHA-256 over every stage artifact, in file-name order.
    pub bundle_sha256: String,
}

/// Digest over `name  sha256` lines of every artifact, sorted by name.
pub fn bundle_digest<'a>(stages: impl IntoIterator<Item = &'a StageMeta>) -> String {
    let mut files: BTreeMap<&str, &str> = BTreeMap::new();
    for meta in stages {
        for (name, digest) in &meta.artifacts {
            files.insert(name, digest);
        }
    }
    let listing: String = files.iter().map(|(name, digest)| format!("{name}  {digest}\n")).collect();
    sha256_hex(listing.as_bytes())
}

/// All five stages in one pass, followed by `run_meta.json`.
pub fn run_all(inputs: &StageInputs, workers: usize) -> Result<RunMeta, CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let mut timings = BTreeMap::new();
    let mut lap = |name: &str, since: &mut Instant| {
        timings.insert(name.to_owned(), since.elapsed().as_millis());
        *since = Instant::now();
    };
    let mut t = Instant::now();

    let session = Session::open(inputs)?;
    lap("ingest", &mut t);
    let elite = session.select_elite()?;
    lap("elite", &mut t);
    let bundle = indicators_from_elite(&session.corpus, &elite, &session.config);
    lap("indicators", &mut t);

    let mut stages = BTreeMap::new();
    for stage in Stage::ALL {
        let artifacts = match stage {
            Stage::IngestCheck => ingest_artifacts(&session),
            Stage::Elite => elite_artifacts(&elite),
            other => bundle_artifacts(other, &bundle),
        };
        stages.insert(stage.name().to_owned(), session.emit(stage, artifacts)?);
    }
    lap("write", &mut t);
    timings.insert("total".to_owned(), clock.elapsed().as_millis());

    let meta = RunMeta {
        tool: "refgeo".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix_ms: started,
        timings_ms: timings,
        workers,
        input: session.input.display().to_string(),
        corpus_sha256: session.corpus_sha256.clone(),
        config_hash: session.config_hash.clone(),
        config: session.config.clone(),
        bundle_sha256: bundle_digest(stages.values()),
        stages,
    };
    write_json(&session.out.join("run_meta.json"), &meta).map_err(CliError::io("writing run_meta.json"))?;
    Ok(meta)
}
