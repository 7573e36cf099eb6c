//! Binary training-example generation: one positive category per document
//! plus k sampled negatives, serialized in the category-first pair format.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// One binary classification record: does `category` describe `document`?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub category: String,
    pub document: String,
    pub label: u8,
    pub doc_id: String,
}

/// Sampling configuration. `instances` counts documents; each document
/// contributes one positive and `negatives_per_positive` negatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub negatives_per_positive: usize,
    pub token_budget: usize,
    pub instances: usize,
    pub seed: u64,
    /// Draw negatives proportionally to corpus frequency (add-one smoothed)
    /// instead of uniformly. Ablation knob; uniform is the default.
    #[serde(default)]
    pub weighted_negatives: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            negatives_per_positive: 7,
            token_budget: 128,
            instances: 100_000,
            seed: 1,
            weighted_negatives: false,
        }
    }
}

/// Pair markers reserve three token positions in the budget.
pub const MARKER_TOKENS: usize = 3;

fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Cuts `text` after its first `max_tokens` whitespace tokens, preserving
/// inner whitespace. Shorter text is returned unchanged.
fn truncate_to_tokens(text: &str, max_tokens: usize) -> &str {
    let mut count = 0usize;
    let mut end = 0usize;
    let mut in_token = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else {
            if !in_token {
                count += 1;
                if count > max_tokens {
                    return &text[..end];
                }
                in_token = true;
            }
            end = i + c.len_utf8();
        }
    }
    text
}

/// Truncates the document so that category + document + three markers fit
/// within `budget` tokens. The category is never truncated; a category that
/// cannot fit is an error.
pub fn truncate_pair<'d>(category: &str, document: &'d str, budget: usize) -> Result<&'d str> {
    let cat_tokens = token_count(category);
    if cat_tokens + MARKER_TOKENS > budget {
        return Err(Error::InvalidInput(format!(
            "category {category:?} occupies {cat_tokens} tokens and cannot fit a budget of {budget}"
        )));
    }
    Ok(truncate_to_tokens(document, budget - cat_tokens - MARKER_TOKENS))
}

/// The sorted unique category vocabulary of a corpus.
pub fn category_vocab(docs: &[Document]) -> Vec<String> {
    let set: BTreeSet<&String> = docs.iter().flat_map(|d| &d.categories).collect();
    set.into_iter().cloned().collect()
}

/// Draws training examples from a corpus.
///
/// Documents are selected uniformly without replacement until
/// `cfg.instances` documents have been emitted or the corpus is exhausted.
/// Each selected document yields exactly one positive example (category
/// drawn uniformly from its category set) and exactly
/// `cfg.negatives_per_positive` negatives (drawn uniformly without
/// replacement from the vocabulary minus the document's categories). All
/// randomness comes from the seed; output order is deterministic.
pub fn sample_examples(
    docs: &[Document],
    category_vocab: &[String],
    cfg: &SamplerConfig,
) -> Result<Vec<TrainingExample>> {
    let mut vocab: Vec<&str> = category_vocab.iter().map(String::as_str).collect();
    vocab.sort_unstable();
    vocab.dedup();
    let vocab_index: BTreeSet<&str> = vocab.iter().copied().collect();

    if vocab.len() <= cfg.negatives_per_positive {
        return Err(Error::InvalidInput(format!(
            "vocabulary of {} categories cannot supply {} distinct negatives",
            vocab.len(),
            cfg.negatives_per_positive
        )));
    }
    for cat in &vocab {
        // Surface budget violations before any sampling happens.
        truncate_pair(cat, "", cfg.token_budget)?;
    }

    // Cumulative corpus frequencies (add-one smoothed so every vocabulary
    // entry stays drawable) for the weighted-negative mode.
    let cumulative: Option<Vec<u64>> = cfg.weighted_negatives.then(|| {
        let mut counts: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
        for doc in docs {
            for cat in &doc.categories {
                *counts.entry(cat.as_str()).or_insert(0) += 1;
            }
        }
        let mut total = 0u64;
        vocab
            .iter()
            .map(|cat| {
                total += counts.get(cat).copied().unwrap_or(0) + 1;
                total
            })
            .collect()
    });

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng);
    order.truncate(cfg.instances);

    let mut out = Vec::with_capacity(order.len() * (1 + cfg.negatives_per_positive));
    for doc_index in order {
        let doc = &docs[doc_index];
        if doc.categories.is_empty() {
            return Err(Error::InvalidInput(format!(
                "document {} has no categories",
                doc.doc_id
            )));
        }
        for cat in &doc.categories {
            if !vocab_index.contains(cat.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "document {} carries category {cat:?} missing from the vocabulary",
                    doc.doc_id
                )));
            }
        }
        let available = vocab.len() - doc.categories.len();
        if available < cfg.negatives_per_positive {
            return Err(Error::InvalidInput(format!(
                "document {} excludes too much of the vocabulary: {} candidates left, {} needed",
                doc.doc_id,
                available,
                cfg.negatives_per_positive
            )));
        }

        let positive = doc
            .categories
            .iter()
            .nth(rng.random_range(0..doc.categories.len()))
            .expect("non-empty category set");
        out.push(TrainingExample {
            category: positive.clone(),
            document: truncate_pair(positive, &doc.text, cfg.token_budget)?.to_string(),
            label: 1,
            doc_id: doc.doc_id.clone(),
        });

        let mut chosen: BTreeSet<&str> = BTreeSet::new();
        while chosen.len() < cfg.negatives_per_positive {
            let candidate = match &cumulative {
                None => vocab[rng.random_range(0..vocab.len())],
                Some(cumulative) => {
                    let total = *cumulative.last().expect("non-empty vocabulary");
                    let draw = rng.random_range(0..total);
                    vocab[cumulative.partition_point(|&c| c <= draw)]
                }
            };
            if doc.categories.contains(candidate) || !chosen.insert(candidate) {
                continue;
            }
            out.push(TrainingExample {
                category: candidate.to_string(),
                document: truncate_pair(candidate, &doc.text, cfg.token_budget)?.to_string(),
                label: 0,
                doc_id: doc.doc_id.clone(),
            });
        }
    }
    Ok(out)
}

/// On-disk formats for training examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// `[CLS] category [SEP] document [SEP]\t<label>` per line, consumable
    /// by external encoder trainers.
    PairText,
    /// One JSON object per line with the full example fields.
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair_text" => Ok(ExportFormat::PairText),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown export format {other:?} (expected pair_text or json)"
            ))),
        }
    }
}

/// Writes examples in the chosen format.
pub fn export_training_file<'a>(
    examples: impl IntoIterator<Item = &'a TrainingExample>,
    format: ExportFormat,
    mut w: impl Write,
) -> Result<()> {
    for ex in examples {
        match format {
            ExportFormat::PairText => {
                writeln!(
                    w,
                    "[CLS] {} [SEP] {} [SEP]\t{}",
                    ex.category, ex.document, ex.label
                )
                .map_err(|e| Error::io("<training file>", e))?;
            }
            ExportFormat::Json => {
                serde_json::to_writer(&mut w, ex)?;
                w.write_all(b"\n").map_err(|e| Error::io("<training file>", e))?;
            }
        }
    }
    Ok(())
}

/// Reads back a JSON-format training file.
pub fn read_training_file(path: &Path, reader: impl BufRead) -> Result<Vec<TrainingExample>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

/// Everything needed to reproduce a sampling run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleManifest {
    pub config: SamplerConfig,
    pub corpus_hash: String,
    pub vocab_size: usize,
    pub documents_emitted: usize,
    pub examples_emitted: usize,
}
