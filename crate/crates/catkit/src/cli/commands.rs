//! Command implementations behind the CLI surface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use super::{resolve, FileConfig, RunManifest, CACHE_ENV};
use crate::community::{
    build_reddit_corpus, build_stackex_corpus, read_ndjson, RedditPost, StackExRecord,
};
use crate::corpus::{read_all, write_shards, CorpusStats, Document};
use crate::error::{Error, Result};
use crate::eval::{
    accuracy, confusion_matrix, ensemble_scores, load_instances, lrap, predict_task,
    render_confusion_tsv, threshold_predictions, weighted_f1, EvalInstance, EvalReport, Metric,
    ScoreMatrix, TaskResult, TaskSpec,
};
use crate::ioutil::open_input;
use crate::sampler::{
    category_vocab, export_training_file, read_training_file, sample_examples, ExportFormat,
    SamplerConfig,
};
use crate::scorer::{esa_build as build_esa_index, load_scorer, train_linear, LinearConfig, Scorer};
use crate::wiki::{build_wiki_corpus, load_hidden_override, WikiFilterConfig};

const DEFAULT_SHARD_SIZE: usize = 50_000;

fn json_pretty_to_file(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

fn write_corpus(
    docs: Vec<Document>,
    stats: &CorpusStats,
    out: &Path,
    shard_size: usize,
    stats_only: bool,
    manifest: &mut RunManifest,
) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let stats_path = out.join("stats.json");
    json_pretty_to_file(&stats_path, stats)?;
    manifest.output(&stats_path);
    if !stats_only {
        let shards = write_shards(docs, out, shard_size)?;
        for shard in &shards {
            manifest.output(&shard.path);
        }
        log::info!("wrote {} shards under {}", shards.len(), out.display());
    }
    Ok(())
}

pub fn wiki_build(args: &super::WikiBuildArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    let mut cfg = WikiFilterConfig {
        min_nonstop_words: resolve(
            args.min_nonstop_words,
            config.get("wiki-build", "min_nonstop_words")?,
            100,
        ),
        max_ancestor_depth: resolve(args.max_depth, config.get("wiki-build", "max_depth")?, 2),
        ..WikiFilterConfig::default()
    };
    if let Some(sections) = config.get::<Vec<String>>("wiki-build", "terminal_sections")? {
        cfg.terminal_sections = sections;
    }
    if let Some(hidden_path) = &args.hidden_file {
        cfg.hidden_categories
            .extend(load_hidden_override(hidden_path, open_input(hidden_path)?)?);
    }
    let shard_size = resolve(
        args.shard_size,
        config.get("wiki-build", "shard_size")?,
        DEFAULT_SHARD_SIZE,
    );

    let corpus = build_wiki_corpus(
        open_input(&args.pages)?,
        open_input(&args.links)?,
        open_input(&args.page_props)?,
        open_input(&args.articles)?,
        &args.articles,
        &cfg,
    )?;
    log::info!(
        "articles={} kept={} short={} uncategorized={} non-article={} dangling-links={}",
        corpus.counts.articles_seen,
        corpus.documents.len(),
        corpus.counts.skipped_short,
        corpus.counts.skipped_uncategorized,
        corpus.counts.skipped_non_article,
        corpus.counts.dangling_links,
    );

    let mut manifest = RunManifest::new(
        "wiki-build",
        json!({
            "min_nonstop_words": cfg.min_nonstop_words,
            "max_ancestor_depth": cfg.max_ancestor_depth,
            "terminal_sections": cfg.terminal_sections,
            "extra_hidden": cfg.hidden_categories.len(),
            "shard_size": shard_size,
            "stats_only": args.stats_only,
        }),
    );
    for input in [&args.pages, &args.links, &args.page_props, &args.articles] {
        manifest.input(input)?;
    }
    if let Some(hidden_path) = &args.hidden_file {
        manifest.input(hidden_path)?;
    }

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    if !args.stats_only {
        let graph_path = args.out.join("graph.tsv");
        let mut graph_file = std::io::BufWriter::new(
            std::fs::File::create(&graph_path).map_err(|e| Error::io(&graph_path, e))?,
        );
        corpus
            .graph
            .write_tsv(&mut graph_file)
            .and_then(|_| graph_file.flush())
            .map_err(|e| Error::io(&graph_path, e))?;
        manifest.output(&graph_path);
    }
    write_corpus(
        corpus.documents,
        &corpus.stats,
        &args.out,
        shard_size,
        args.stats_only,
        &mut manifest,
    )?;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&args.out.join("manifest.json"))
}

pub fn stackex_build(args: &super::StackexBuildArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    let shard_size = resolve(
        args.shard_size,
        config.get("stackex-build", "shard_size")?,
        DEFAULT_SHARD_SIZE,
    );
    let records: Vec<StackExRecord> = read_ndjson(&args.input, open_input(&args.input)?)?;
    let corpus = build_stackex_corpus(records)?;
    log::info!(
        "kept={} skipped-empty={}",
        corpus.documents.len(),
        corpus.skipped_empty
    );
    let mut manifest = RunManifest::new(
        "stackex-build",
        json!({"shard_size": shard_size, "stats_only": args.stats_only}),
    );
    manifest.input(&args.input)?;
    write_corpus(
        corpus.documents,
        &corpus.stats,
        &args.out,
        shard_size,
        args.stats_only,
        &mut manifest,
    )?;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&args.out.join("manifest.json"))
}

pub fn reddit_build(args: &super::RedditBuildArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    let shard_size = resolve(
        args.shard_size,
        config.get("reddit-build", "shard_size")?,
        DEFAULT_SHARD_SIZE,
    );
    let top_k = resolve(args.top_k, config.get("reddit-build", "top_k")?, 3000);
    let min_karma = resolve(args.min_karma, config.get("reddit-build", "min_karma")?, 3);
    let posts: Vec<RedditPost> = read_ndjson(&args.input, open_input(&args.input)?)?;
    let corpus = build_reddit_corpus(&posts, top_k, min_karma)?;
    log::info!(
        "kept={} low-karma={} empty={} subreddits={}",
        corpus.documents.len(),
        corpus.skipped_low_karma,
        corpus.skipped_empty,
        corpus.frequencies.entries.len(),
    );
    let mut manifest = RunManifest::new(
        "reddit-build",
        json!({
            "top_k": top_k,
            "min_karma_exclusive": min_karma,
            "shard_size": shard_size,
            "stats_only": args.stats_only,
        }),
    );
    manifest.input(&args.input)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let freq_path = args.out.join("subreddit_freq.tsv");
    let mut freq_file = std::io::BufWriter::new(
        std::fs::File::create(&freq_path).map_err(|e| Error::io(&freq_path, e))?,
    );
    corpus
        .frequencies
        .write_tsv(&mut freq_file)
        .and_then(|_| freq_file.flush())
        .map_err(|e| Error::io(&freq_path, e))?;
    manifest.output(&freq_path);

    write_corpus(
        corpus.documents,
        &corpus.stats,
        &args.out,
        shard_size,
        args.stats_only,
        &mut manifest,
    )?;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&args.out.join("manifest.json"))
}

pub fn sample(args: &super::SampleArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    let docs = read_all(&args.corpus)?;
    let defaults = SamplerConfig::default();
    let cfg = SamplerConfig {
        negatives_per_positive: resolve(
            args.negatives,
            config.get("sample", "negatives")?,
            defaults.negatives_per_positive,
        ),
        token_budget: resolve(args.budget, config.get("sample", "budget")?, defaults.token_budget),
        // The sampler stops at corpus exhaustion, so the default works for
        // corpora of any size.
        instances: resolve(args.instances, config.get("sample", "instances")?, defaults.instances),
        seed: resolve(args.seed, config.get("sample", "seed")?, defaults.seed),
        weighted_negatives: args.weighted_negatives
            || config.get("sample", "weighted_negatives")?.unwrap_or(false),
    };
    let format: ExportFormat = resolve(
        args.format.clone(),
        config.get("sample", "format")?,
        "json".to_string(),
    )
    .parse()?;

    let vocab = category_vocab(&docs);
    let examples = sample_examples(&docs, &vocab, &cfg)?;
    let documents_emitted = examples.iter().filter(|e| e.label == 1).count();

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let out_path = match format {
        ExportFormat::PairText => args.out.join("train.pairs.txt"),
        ExportFormat::Json => args.out.join("train.jsonl"),
    };
    let mut writer = std::io::BufWriter::new(
        std::fs::File::create(&out_path).map_err(|e| Error::io(&out_path, e))?,
    );
    export_training_file(&examples, format, &mut writer)?;
    writer.flush().map_err(|e| Error::io(&out_path, e))?;

    let mut manifest = RunManifest::new(
        "sample",
        json!({
            "config": cfg,
            "corpus_hash": super::sha256_corpus(&args.corpus)?,
            "vocab_size": vocab.len(),
            "documents_emitted": documents_emitted,
            "examples_emitted": examples.len(),
            "format": match format {
                ExportFormat::PairText => "pair_text",
                ExportFormat::Json => "json",
            },
            "export_notes": {
                "token_budget_unit": "whitespace tokens; subword-tokenizing consumers should re-truncate",
                "suggested_encoder_lr": 2e-5,
            },
        }),
    );
    manifest.seeds = vec![cfg.seed];
    manifest.output(&out_path);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&args.out.join("manifest.json"))
}

pub fn train(args: &super::TrainArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    if args.seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    let examples = read_training_file(&args.examples, open_input(&args.examples)?)?;
    let base = LinearConfig {
        bits: resolve(args.bits, config.get("train", "bits")?, 22),
        epochs: resolve(args.epochs, config.get("train", "epochs")?, 1),
        base_lr: resolve(args.lr, config.get("train", "lr")?, 0.1),
        warmup_fraction: resolve(args.warmup, config.get("train", "warmup")?, 0.10),
        seed: 0,
    };
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    // Seeds are independent; run them in parallel, write in seed order.
    use rayon::prelude::*;
    let outputs: Vec<(u64, PathBuf)> = args
        .seeds
        .par_iter()
        .map(|&seed| -> Result<(u64, PathBuf)> {
            let config = LinearConfig { seed, ..base.clone() };
            let model = train_linear(&examples, &config)?;
            let path = args.out.join(format!("model-seed{seed}.bin"));
            model.save(&path)?;
            log::info!(
                "seed {seed}: final epoch mean BCE {:?}",
                model.loss_trace().last()
            );
            Ok((seed, path))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut manifest = RunManifest::new(
        "train",
        json!({
            "bits": base.bits,
            "epochs": base.epochs,
            "base_lr": base.base_lr,
            "warmup_fraction": base.warmup_fraction,
            "examples": examples.len(),
        }),
    );
    manifest.input(&args.examples)?;
    manifest.seeds = args.seeds.clone();
    for (_, path) in &outputs {
        manifest.output(path);
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&args.out.join("manifest.json"))
}

pub fn esa_build(args: &super::EsaBuildArgs, config: &FileConfig) -> Result<()> {
    let started = Instant::now();
    let docs = read_all(&args.corpus)?;
    let min_df = resolve(args.min_df, config.get("esa-build", "min_df")?, 2);
    let max_df = resolve(args.max_df, config.get("esa-build", "max_df")?, 0.5);
    let index = build_esa_index(&docs, min_df, max_df)?;
    log::info!(
        "index: {} concepts, {} terms",
        index.concept_count(),
        index.vocabulary_size()
    );
    index.save(&args.out)?;

    let mut manifest = RunManifest::new(
        "esa-build",
        json!({
            "min_df": min_df,
            "max_df_fraction": max_df,
            "corpus_hash": super::sha256_corpus(&args.corpus)?,
            "concepts": index.concept_count(),
            "terms": index.vocabulary_size(),
        }),
    );
    manifest.output(&args.out);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&manifest_path_for(&args.out))
}

fn manifest_path_for(artifact: &Path) -> PathBuf {
    let mut name = artifact
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    name.push_str(".manifest.json");
    artifact.with_file_name(name)
}

fn load_task_and_instances(task_path: &Path, data_path: &Path) -> Result<(TaskSpec, Vec<EvalInstance>)> {
    // A bare bundled-task name works in place of a spec file path.
    let task = if !task_path.exists() {
        match task_path.to_str().and_then(|name| crate::eval::builtin_task(name).ok()) {
            Some(spec) => spec,
            None => {
                let file = std::fs::File::open(task_path).map_err(|e| Error::io(task_path, e))?;
                TaskSpec::from_json(task_path, file)?
            }
        }
    } else {
        let file = std::fs::File::open(task_path).map_err(|e| Error::io(task_path, e))?;
        TaskSpec::from_json(task_path, file)?
    };
    let instances = load_instances(&task, data_path, open_input(data_path)?)?;
    Ok((task, instances))
}

/// Predicts a score matrix, going through the on-disk cache when the
/// `CATKIT_CACHE` directory is configured.
fn cached_predict(
    model_path: &Path,
    scorer: &dyn Scorer,
    task: &TaskSpec,
    data_path: &Path,
    instances: &[EvalInstance],
) -> Result<ScoreMatrix> {
    let cache_dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let cache_file = match &cache_dir {
        Some(dir) => {
            let key_material = format!(
                "{}|{}|{}",
                super::sha256_file(model_path)?,
                serde_json::to_string(task)?,
                super::sha256_file(data_path)?
            );
            use sha2::{Digest, Sha256};
            let key = Sha256::digest(key_material.as_bytes());
            let mut hex = String::with_capacity(64);
            for byte in key {
                hex.push_str(&format!("{byte:02x}"));
            }
            Some(dir.join(format!("scores-{hex}.tsv")))
        }
        None => None,
    };
    if let Some(path) = &cache_file {
        if path.is_file() {
            log::info!("score cache hit: {}", path.display());
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            return ScoreMatrix::read_tsv(path, std::io::BufReader::new(file));
        }
    }
    let (matrix, _) = predict_task(scorer, task, instances)?;
    if let Some(path) = &cache_file {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut file = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        matrix.write_tsv(&mut file).and_then(|_| file.flush()).map_err(|e| Error::io(path, e))?;
    }
    Ok(matrix)
}

pub fn predict(args: &super::PredictArgs) -> Result<()> {
    let started = Instant::now();
    let scorer = load_scorer(&args.model)?;
    let (task, instances) = load_task_and_instances(&args.task, &args.data)?;
    let matrix = cached_predict(&args.model, scorer.as_ref(), &task, &args.data, &instances)?;
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?,
    );
    matrix
        .write_tsv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&args.out, e))?;

    if let Some(preds_path) = &args.preds {
        let predictions = matrix.argmax_predictions();
        let mut file = std::io::BufWriter::new(
            std::fs::File::create(preds_path).map_err(|e| Error::io(preds_path, e))?,
        );
        for p in &predictions {
            writeln!(file, "{p}\t{}", task.labels[*p]).map_err(|e| Error::io(preds_path, e))?;
        }
        file.flush().map_err(|e| Error::io(preds_path, e))?;
    }

    let mut manifest = RunManifest::new(
        "predict",
        json!({"task": task.name, "instances": instances.len(), "labels": task.labels.len()}),
    );
    manifest.input(&args.model)?;
    manifest.input(&args.task)?;
    manifest.input(&args.data)?;
    manifest.output(&args.out);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&manifest_path_for(&args.out))
}

/// The task's headline metric over a score matrix.
fn metric_value(
    task: &TaskSpec,
    matrix: &ScoreMatrix,
    golds: &[std::collections::BTreeSet<usize>],
    f1_threshold: f64,
) -> Result<f64> {
    match task.metric {
        Metric::Accuracy => accuracy(&matrix.argmax_predictions(), golds),
        Metric::Lrap => lrap(matrix, golds),
        Metric::WeightedF1 => weighted_f1(
            &threshold_predictions(matrix, f1_threshold),
            golds,
            task.label_count(),
        ),
    }
}

fn task_data_pairs<'a>(tasks: &'a [PathBuf], data: &'a [PathBuf]) -> Result<Vec<(&'a PathBuf, &'a PathBuf)>> {
    if tasks.len() != data.len() {
        return Err(Error::InvalidInput(format!(
            "{} --task files but {} --data files",
            tasks.len(),
            data.len()
        )));
    }
    Ok(tasks.iter().zip(data.iter()).collect())
}

pub fn eval(args: &super::EvalArgs) -> Result<()> {
    let pairs = task_data_pairs(&args.task, &args.data)?;
    if args.confusion.is_some() && pairs.len() != 1 {
        return Err(Error::InvalidInput(
            "--confusion requires exactly one task".into(),
        ));
    }
    let scorer = load_scorer(&args.model)?;
    let mut rows = Vec::new();
    for (task_path, data_path) in pairs {
        let (task, instances) = load_task_and_instances(task_path, data_path)?;
        let golds: Vec<_> = instances.iter().map(|i| i.gold.clone()).collect();
        let matrix = cached_predict(&args.model, scorer.as_ref(), &task, data_path, &instances)?;
        let value = metric_value(&task, &matrix, &golds, args.f1_threshold)?;
        if let Some(confusion_path) = &args.confusion {
            if task.multi_label {
                return Err(Error::InvalidInput(
                    "confusion matrices are defined for single-label tasks".into(),
                ));
            }
            let counts = confusion_matrix(&matrix.argmax_predictions(), &golds, task.label_count())?;
            std::fs::write(confusion_path, render_confusion_tsv(&counts, &task.labels))
                .map_err(|e| Error::io(confusion_path, e))?;
        }
        rows.push(TaskResult::new(
            task.name.clone(),
            task.group_name(),
            task.metric,
            vec![value],
            None,
        )?);
    }
    let report = EvalReport::from_tasks(rows)?;
    print!("{}", report.render_table());
    if let Some(json_path) = &args.json {
        json_pretty_to_file(json_path, &report)?;
    }
    Ok(())
}

pub fn ensemble(args: &super::EnsembleArgs) -> Result<()> {
    let pairs = task_data_pairs(&args.task, &args.data)?;
    if args.models.is_empty() && args.scores.is_empty() {
        return Err(Error::InvalidInput(
            "ensemble needs --models or --scores".into(),
        ));
    }
    if !args.scores.is_empty() && pairs.len() != 1 {
        return Err(Error::InvalidInput(
            "--scores mode supports exactly one task".into(),
        ));
    }

    let mut rows = Vec::new();
    for (task_path, data_path) in pairs {
        let (task, instances) = load_task_and_instances(task_path, data_path)?;
        let golds: Vec<_> = instances.iter().map(|i| i.gold.clone()).collect();
        let matrices: Vec<ScoreMatrix> = if args.scores.is_empty() {
            let mut matrices = Vec::with_capacity(args.models.len());
            for model_path in &args.models {
                let scorer = load_scorer(model_path)?;
                matrices.push(cached_predict(
                    model_path,
                    scorer.as_ref(),
                    &task,
                    data_path,
                    &instances,
                )?);
            }
            matrices
        } else {
            let mut matrices = Vec::with_capacity(args.scores.len());
            for path in &args.scores {
                let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
                matrices.push(ScoreMatrix::read_tsv(path, std::io::BufReader::new(file))?);
            }
            matrices
        };
        let per_seed: Vec<f64> = matrices
            .iter()
            .map(|m| metric_value(&task, m, &golds, args.f1_threshold))
            .collect::<Result<_>>()?;
        let mean = ensemble_scores(&matrices)?;
        let ensemble_value = metric_value(&task, &mean, &golds, args.f1_threshold)?;
        rows.push(TaskResult::new(
            task.name.clone(),
            task.group_name(),
            task.metric,
            per_seed,
            Some(ensemble_value),
        )?);
    }
    let report = EvalReport::from_tasks(rows)?;
    print!("{}", report.render_table());
    if let Some(json_path) = &args.json {
        json_pretty_to_file(json_path, &report)?;
    }
    Ok(())
}

pub fn stats(args: &super::StatsArgs) -> Result<()> {
    let docs = read_all(&args.corpus)?;
    let stats = CorpusStats::from_docs(&docs);
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

pub fn dump(args: &super::DumpArgs) -> Result<()> {
    let stdout = std::io::stdout();
    crate::scorer::dump_scorer(&args.model, stdout.lock())
}
