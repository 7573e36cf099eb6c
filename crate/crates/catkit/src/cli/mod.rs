//! Command-line surface: ingestion, sampling, training, and evaluation as
//! reproducible runs. Logs go to stderr, data to files or stdout; every
//! mutating command writes a manifest sufficient to re-run it bit-identically.

mod commands;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable naming the score-matrix cache directory.
pub const CACHE_ENV: &str = "CATKIT_CACHE";

#[derive(Parser)]
#[command(name = "catkit", version, about = "Build document-category corpora, train scorers, evaluate classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file with per-command defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for shard/seed/scoring parallelism (0 = automatic).
    /// Output is identical regardless of this setting.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the Wikipedia corpus from SQL dumps and extracted article text.
    WikiBuild(WikiBuildArgs),
    /// Build the Stack Exchange corpus from question records.
    StackexBuild(StackexBuildArgs),
    /// Build the Reddit corpus from post records.
    RedditBuild(RedditBuildArgs),
    /// Draw binary training examples from a corpus.
    Sample(SampleArgs),
    /// Train linear scorers, one per seed.
    Train(TrainArgs),
    /// Build a concept-similarity index from a corpus.
    EsaBuild(EsaBuildArgs),
    /// Score a task's instances with a model, writing the score matrix.
    Predict(PredictArgs),
    /// Evaluate a model on one or more tasks.
    Eval(EvalArgs),
    /// Evaluate multiple model runs: per-seed median plus score-averaged ensemble.
    Ensemble(EnsembleArgs),
    /// Print corpus statistics as JSON.
    Stats(StatsArgs),
    /// Print the textual debug dump of a model file.
    Dump(DumpArgs),
}

#[derive(Args)]
pub struct WikiBuildArgs {
    /// page table SQL dump (.sql or .sql.gz).
    #[arg(long)]
    pub pages: PathBuf,
    /// categorylinks table SQL dump.
    #[arg(long)]
    pub links: PathBuf,
    /// page_props table SQL dump.
    #[arg(long)]
    pub page_props: PathBuf,
    /// Extracted article text: newline-delimited JSON {id, title, text}.
    #[arg(long)]
    pub articles: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub shard_size: Option<usize>,
    #[arg(long)]
    pub min_nonstop_words: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Extra hidden category names, one per line.
    #[arg(long)]
    pub hidden_file: Option<PathBuf>,
    /// Write stats.json only; skip shard output.
    #[arg(long)]
    pub stats_only: bool,
}

#[derive(Args)]
pub struct StackexBuildArgs {
    /// Records: newline-delimited JSON {text, site}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub shard_size: Option<usize>,
    #[arg(long)]
    pub stats_only: bool,
}

#[derive(Args)]
pub struct RedditBuildArgs {
    /// Posts: newline-delimited JSON {title, subreddit, karma}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Keep posts with karma strictly greater than this.
    #[arg(long)]
    pub min_karma: Option<i64>,
    #[arg(long)]
    pub shard_size: Option<usize>,
    #[arg(long)]
    pub stats_only: bool,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Corpus directory of shards.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Number of documents to draw (defaults to the whole corpus).
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// pair_text or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Frequency-weighted negative sampling (ablation).
    #[arg(long)]
    pub weighted_negatives: bool,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training examples in json format (train.jsonl).
    #[arg(long)]
    pub examples: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated seeds, one model per seed.
    #[arg(long, value_delimiter = ',', default_value = "1,11,21,31,41")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub warmup: Option<f64>,
}

#[derive(Args)]
pub struct EsaBuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output index file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub min_df: Option<u32>,
    #[arg(long)]
    pub max_df: Option<f64>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Task spec JSON ({name, labels, multi_label, metric}).
    #[arg(long)]
    pub task: PathBuf,
    /// Instances: newline-delimited JSON {text, labels}.
    #[arg(long)]
    pub data: PathBuf,
    /// Score matrix TSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write argmax predictions (index TAB label name).
    #[arg(long)]
    pub preds: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Task spec(s); pair each with a --data file in the same order.
    #[arg(long, required = true, num_args = 1..)]
    pub task: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    /// Write the report as JSON here as well.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write a confusion matrix TSV (single task, single-label only).
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    /// Threshold turning scores into prediction sets for weighted F1.
    #[arg(long, default_value_t = 0.5)]
    pub f1_threshold: f64,
}

#[derive(Args)]
pub struct EnsembleArgs {
    /// Model files from independent runs (e.g. the per-seed models).
    #[arg(long, num_args = 1.., conflicts_with = "scores")]
    pub models: Vec<PathBuf>,
    /// Precomputed score matrix TSVs instead of models (single task).
    #[arg(long, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub task: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Threshold turning scores into prediction sets for weighted F1.
    #[arg(long, default_value_t = 0.5)]
    pub f1_threshold: f64,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub model: PathBuf,
}

/// Stable exit codes: 2 input error, 3 internal error, 4 format/version
/// mismatch between artifacts.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::VersionMismatch { .. } => 4,
        Error::Training(_) => 3,
        _ => 2,
    }
}

/// Runs a parsed command line, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    if cli.jobs > 0 {
        // Scoring assembly is index-ordered, so thread count never changes
        // output bytes.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let config = match FileConfig::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return exit_code(&err);
        }
    };
    let outcome = match &cli.command {
        Command::WikiBuild(args) => commands::wiki_build(args, &config),
        Command::StackexBuild(args) => commands::stackex_build(args, &config),
        Command::RedditBuild(args) => commands::reddit_build(args, &config),
        Command::Sample(args) => commands::sample(args, &config),
        Command::Train(args) => commands::train(args, &config),
        Command::EsaBuild(args) => commands::esa_build(args, &config),
        Command::Predict(args) => commands::predict(args),
        Command::Eval(args) => commands::eval(args),
        Command::Ensemble(args) => commands::ensemble(args),
        Command::Stats(args) => commands::stats(args),
        Command::Dump(args) => commands::dump(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

/// Per-command defaults loaded from `--config`; flags take precedence over
/// file values, file values over built-in defaults.
#[derive(Default)]
pub struct FileConfig(Option<serde_json::Value>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig(None));
        };
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        Ok(FileConfig(Some(value)))
    }

    /// Typed lookup of `<command>.<key>`.
    pub fn get<T: serde::de::DeserializeOwned>(&self, command: &str, key: &str) -> Result<Option<T>> {
        let Some(root) = &self.0 else { return Ok(None) };
        let Some(value) = root.get(command).and_then(|section| section.get(key)) else {
            return Ok(None);
        };
        serde_json::from_value(value.clone())
            .map(Some)
            .map_err(|e| Error::InvalidInput(format!("config key {command}.{key}: {e}")))
    }
}

/// flag > config file > default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Reproducibility record written next to every mutating command's output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    /// Input path -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: crate::VERSION.to_string(),
            config,
            inputs: BTreeMap::new(),
            seeds: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}

/// Streaming SHA-256 of a file, hex-encoded.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(hex_digest(hasher))
}

/// Combined hash of a corpus directory: SHA-256 over each shard's digest in
/// filename order.
pub fn sha256_corpus(dir: &Path) -> Result<String> {
    let mut outer = Sha256::new();
    for shard in crate::corpus::shard_files(dir)? {
        outer.update(sha256_file(&shard)?.as_bytes());
    }
    Ok(hex_digest(outer))
}

fn hex_digest(hasher: Sha256) -> String {
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
