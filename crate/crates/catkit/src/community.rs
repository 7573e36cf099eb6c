//! Stack Exchange and Reddit corpus builders.
//!
//! Both sources carry exactly one category per document: the (meta-merged)
//! site slug for Stack Exchange, the subreddit name for Reddit.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{normalize_category, CorpusStats, Document, Source};
use crate::error::{Error, Result};

/// A Stack Exchange question title or description with its site slug.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct StackExRecord {
    pub text: String,
    pub site: String,
}

/// A Reddit post title with its subreddit and karma score.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RedditPost {
    pub title: String,
    pub subreddit: String,
    pub karma: i64,
}

/// Folds a meta site into its main site: a leading `meta.` prefix or a
/// trailing `.meta` suffix is stripped. The network-wide "meta" site maps to
/// itself. Idempotent.
pub fn merge_meta_site(site: &str) -> &str {
    if site == "meta" {
        return site;
    }
    if let Some(main) = site.strip_prefix("meta.") {
        return main;
    }
    if let Some(main) = site.strip_suffix(".meta") {
        return main;
    }
    site
}

/// Result of a community build: documents plus skip accounting.
#[derive(Debug)]
pub struct CommunityCorpus {
    pub documents: Vec<Document>,
    pub stats: CorpusStats,
    pub skipped_empty: u64,
}

/// Builds the Stack Exchange corpus: one document per record, one category
/// per document. Records with empty text are skipped and counted.
pub fn build_stackex_corpus(
    records: impl IntoIterator<Item = StackExRecord>,
) -> Result<CommunityCorpus> {
    let mut documents = Vec::new();
    let mut skipped_empty = 0u64;
    for (index, record) in records.into_iter().enumerate() {
        if record.text.trim().is_empty() {
            skipped_empty += 1;
            continue;
        }
        let site = merge_meta_site(&record.site);
        let Some(category) = normalize_category(site) else {
            skipped_empty += 1;
            continue;
        };
        documents.push(Document::new(
            format!("se{index:09}"),
            Source::Stackexchange,
            record.text,
            [category],
        ));
    }
    let stats = CorpusStats::from_docs(&documents);
    Ok(CommunityCorpus {
        documents,
        stats,
        skipped_empty,
    })
}

/// Subreddit frequency table, sorted by descending count then name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub entries: Vec<(String, u64)>,
}

impl FrequencyTable {
    pub fn write_tsv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        for (name, count) in &self.entries {
            writeln!(w, "{name}\t{count}")?;
        }
        Ok(())
    }
}

/// Result of the Reddit build.
#[derive(Debug)]
pub struct RedditCorpus {
    pub documents: Vec<Document>,
    pub stats: CorpusStats,
    pub frequencies: FrequencyTable,
    pub skipped_low_karma: u64,
    pub skipped_empty: u64,
}

/// Builds the Reddit corpus in two passes over the posts: first count
/// subreddit frequency among posts with karma strictly above
/// `min_karma_exclusive`, then emit documents only for the `top_k` most
/// frequent subreddits (ties broken by name).
pub fn build_reddit_corpus(
    posts: &[RedditPost],
    top_k: usize,
    min_karma_exclusive: i64,
) -> Result<RedditCorpus> {
    assert!(top_k >= 1, "top_k must be >= 1");

    let mut skipped_low_karma = 0u64;
    let mut skipped_empty = 0u64;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for post in posts {
        if post.karma <= min_karma_exclusive {
            skipped_low_karma += 1;
            continue;
        }
        if post.title.trim().is_empty() {
            skipped_empty += 1;
            continue;
        }
        *counts.entry(post.subreddit.as_str()).or_insert(0) += 1;
    }

    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(name, count)| (name.to_string(), count))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let kept: std::collections::HashSet<&str> = entries
        .iter()
        .take(top_k)
        .map(|(name, _)| name.as_str())
        .collect();

    let mut documents = Vec::new();
    for (index, post) in posts.iter().enumerate() {
        if post.karma <= min_karma_exclusive
            || post.title.trim().is_empty()
            || !kept.contains(post.subreddit.as_str())
        {
            continue;
        }
        let Some(category) = normalize_category(&post.subreddit) else {
            continue;
        };
        documents.push(Document::new(
            format!("rd{index:09}"),
            Source::Reddit,
            post.title.clone(),
            [category],
        ));
    }
    let stats = CorpusStats::from_docs(&documents);
    Ok(RedditCorpus {
        documents,
        stats,
        frequencies: FrequencyTable { entries },
        skipped_low_karma,
        skipped_empty,
    })
}

/// Reads newline-delimited JSON records, aborting on a malformed line.
pub fn read_ndjson<T: serde::de::DeserializeOwned>(
    path: &Path,
    reader: impl BufRead,
) -> Result<Vec<T>> {
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
