//! Core corpus data model: documents, category normalization, the category
//! graph, stopwords, and the sharded on-disk store shared by all ingesters.

mod graph;
mod shards;
mod stopwords;

pub use graph::CategoryGraph;
pub use shards::{read_all, read_shards, shard_files, write_shards, CorpusShard, SHARD_EXTENSION};
pub use stopwords::StopwordList;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Where a document was mined from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Wikipedia,
    Stackexchange,
    Reddit,
    Task,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Source::Wikipedia => "wikipedia",
            Source::Stackexchange => "stackexchange",
            Source::Reddit => "reddit",
            Source::Task => "task",
        };
        f.write_str(s)
    }
}

/// One text unit paired with the set of categories that describe it.
///
/// After ingest, `text` is non-empty and `categories` holds at least one
/// normalized category name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub source: Source,
    pub text: String,
    pub categories: BTreeSet<String>,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        source: Source,
        text: impl Into<String>,
        categories: impl IntoIterator<Item = String>,
    ) -> Self {
        Document {
            doc_id: doc_id.into(),
            source,
            text: text.into(),
            categories: categories.into_iter().collect(),
        }
    }

    /// Whitespace token count of the document text.
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// Normalizes a raw category name: underscores become spaces, runs of
/// whitespace collapse to one space, ends are trimmed, and the result is
/// lowercased. Idempotent. Returns `None` when nothing is left.
pub fn normalize_category(raw: &str) -> Option<String> {
    let cased = normalize_category_cased(raw)?;
    Some(cased.to_lowercase())
}

/// Same cleanup as [`normalize_category`] but preserves the original casing.
/// Used where capitalization carries information, e.g. entity span extraction.
pub fn normalize_category_cased(raw: &str) -> Option<String> {
    let mut out = String::with_capacity(raw.len());
    for part in raw.replace('_', " ").split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(part);
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// Summary statistics over a document set, one row of the corpus report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: u64,
    pub unique_categories: u64,
    pub avg_categories_per_doc: f64,
    pub mode_categories_per_doc: u64,
    pub avg_words_per_doc: f64,
}

impl CorpusStats {
    /// Computes stats over a stream of documents.
    pub fn from_docs<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Self {
        let mut documents = 0u64;
        let mut cats = BTreeSet::new();
        let mut cat_total = 0u64;
        let mut word_total = 0u64;
        let mut cat_count_hist = std::collections::BTreeMap::<u64, u64>::new();
        for doc in docs {
            documents += 1;
            let n = doc.categories.len() as u64;
            cat_total += n;
            *cat_count_hist.entry(n).or_insert(0) += 1;
            word_total += doc.word_count() as u64;
            cats.extend(doc.categories.iter().cloned());
        }
        let mode = cat_count_hist
            .iter()
            // max_by_key keeps the last maximum; iterate descending so the
            // smallest count wins ties deterministically.
            .rev()
            .max_by_key(|(_, freq)| **freq)
            .map(|(n, _)| *n)
            .unwrap_or(0);
        CorpusStats {
            documents,
            unique_categories: cats.len() as u64,
            avg_categories_per_doc: if documents == 0 {
                0.0
            } else {
                cat_total as f64 / documents as f64
            },
            mode_categories_per_doc: mode,
            avg_words_per_doc: if documents == 0 {
                0.0
            } else {
                word_total as f64 / documents as f64
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_replaces_underscores_and_lowercases() {
        assert_eq!(
            normalize_category("National_Register").as_deref(),
            Some("national register")
        );
    }

    #[test]
    fn normalize_trims_whitespace() {
        assert_eq!(normalize_category("  Peace ").as_deref(), Some("peace"));
    }

    #[test]
    fn normalize_long_name_is_lowercased_verbatim() {
        let raw = "Properties of religious function on the National Register of Historic Places in the United States Virgin Islands";
        assert_eq!(
            normalize_category(raw).as_deref(),
            Some("properties of religious function on the national register of historic places in the united states virgin islands")
        );
    }

    #[test]
    fn normalize_rejects_empty() {
        assert_eq!(normalize_category("  _ _  "), None);
        assert_eq!(normalize_category(""), None);
    }

    #[test]
    fn normalize_collapses_inner_whitespace() {
        assert_eq!(
            normalize_category("A  \t B__C").as_deref(),
            Some("a b c")
        );
    }

    #[test]
    fn stats_on_empty_corpus_are_zero() {
        let stats = CorpusStats::from_docs([]);
        assert_eq!(stats.documents, 0);
        assert_eq!(stats.unique_categories, 0);
        assert_eq!(stats.avg_categories_per_doc, 0.0);
    }

    #[test]
    fn stats_count_categories_and_words() {
        let docs = vec![
            Document::new("a", Source::Task, "one two three", ["x".into(), "y".into()]),
            Document::new("b", Source::Task, "four five", ["x".into()]),
        ];
        let stats = CorpusStats::from_docs(&docs);
        assert_eq!(stats.documents, 2);
        assert_eq!(stats.unique_categories, 2);
        assert_eq!(stats.avg_categories_per_doc, 1.5);
        assert_eq!(stats.avg_words_per_doc, 2.5);
        assert_eq!(stats.mode_categories_per_doc, 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_idempotent(raw in "\\PC*") {
                if let Some(once) = normalize_category(&raw) {
                    let twice = normalize_category(&once);
                    prop_assert_eq!(Some(once), twice);
                }
            }

            #[test]
            fn normalized_has_no_underscore_or_double_space(raw in "\\PC*") {
                if let Some(n) = normalize_category(&raw) {
                    prop_assert!(!n.contains('_'));
                    prop_assert!(!n.contains("  "));
                    prop_assert_eq!(n.trim(), &n);
                }
            }
        }
    }
}
