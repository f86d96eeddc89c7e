//! The `refgeo` command line: staged indicator runs and synthetic corpora.
//!
//! Exit codes: 0 success, 2 missing input file, 3 invalid configuration,
//! 4 missing or stale upstream artifact, 1 anything else.

pub mod error;
pub mod report;
pub mod stages;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use refgeo_core::synth::{write_jsonl, SynthParams};

pub use error::CliError;
pub use stages::{run_all, run_stage, RunMeta, Stage, StageInputs, StageMeta};

#[derive(Debug, Parser)]
#[command(name = "refgeo", version, about = "Geography of references in highly cited articles")]
pub struct Cli {
    /// Worker threads (defaults to the number of available cores).
    #[arg(long, global = true, env = "REFGEO_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and resolve the corpus; writes ingest_report.json.
    IngestCheck(StageArgs),
    /// Select the elite set; writes elite.csv and elite_thresholds.csv.
    Elite(StageArgs),
    /// Country share tables and yearly reference shares.
    Shares(StageArgs),
    /// Lagged ratios, their summary and aggregate ratios.
    Ratios(StageArgs),
    /// Domestic reference ratios and smoothed series.
    Domestic(StageArgs),
    /// Every stage in order, plus run_meta.json.
    All(StageArgs),
    /// Write a seeded synthetic corpus as JSON lines.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct StageArgs {
    /// Corpus file, one JSON record per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON run configuration; omitted keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Destination file.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON generator parameters; flags below override it.
    #[arg(long, alias = "params")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of main articles.
    #[arg(long = "n", alias = "articles")]
    pub articles: Option<usize>,
    #[arg(long)]
    pub mean_references: Option<f64>,
    #[arg(long)]
    pub attachment_exponent: Option<f64>,
}

impl From<StageArgs> for StageInputs {
    fn from(a: StageArgs) -> Self {
        StageInputs { input: a.input, out: a.out, config: a.config }
    }
}

fn synth(args: SynthArgs) -> Result<String, CliError> {
    let mut params = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CliError::MissingInput(path.clone()),
                _ => CliError::Io { context: format!("reading {}", path.display()), source: e },
            })?;
            SynthParams::from_json(&text).map_err(|source| CliError::InvalidConfig { file: path.clone(), source })?
        }
        None => SynthParams::default(),
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    if let Some(n) = args.articles {
        params.n_articles = n;
    }
    if let Some(m) = args.mean_references {
        params.mean_references = m;
    }
    if let Some(a) = args.attachment_exponent {
        params.attachment_exponent = a;
    }
    let file = fs::File::create(&args.out).map_err(CliError::io(format!("creating {}", args.out.display())))?;
    let stats = write_jsonl(&params, file)?;
    Ok(serde_json::to_string(&stats).expect("stats serialize"))
}

fn dispatch(command: Command, workers: usize) -> Result<String, CliError> {
    let stage = |stage: Stage, args: StageArgs| -> Result<String, CliError> {
        let meta = run_stage(stage, &args.into())?;
        Ok(format!("{}: wrote {} artifacts", stage.name(), meta.artifacts.len()))
    };
    match command {
        Command::IngestCheck(a) => stage(Stage::IngestCheck, a),
        Command::Elite(a) => stage(Stage::Elite, a),
        Command::Shares(a) => stage(Stage::Shares, a),
        Command::Ratios(a) => stage(Stage::Ratios, a),
        Command::Domestic(a) => stage(Stage::Domestic, a),
        Command::All(a) => {
            let meta = run_all(&a.into(), workers)?;
            Ok(format!("all: bundle {} in {} ms", meta.bundle_sha256, meta.timings_ms["total"]))
        }
        Command::Synth(a) => synth(a),
    }
}

/// Runs a parsed command on a dedicated pool of `workers` threads.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    let workers = cli
        .workers
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Other(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(cli.command, workers))
}

/// Parses `args`, runs, reports to stdout/stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(summary) => {
            let _ = writeln!(std::io::stdout(), "{summary}");
            0
        }
        Err(e) => {
            eprintln!("refgeo: {e}");
            e.exit_code()
        }
    }
}
