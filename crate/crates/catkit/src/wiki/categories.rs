//! Category-name expansion: stopword splitting, capitalization-based entity
//! spans, and ancestor closure, with hidden/disambiguation filtering.

use std::collections::BTreeSet;

use crate::corpus::{CategoryGraph, StopwordList};
use crate::text::trimmed_words;

use super::WikiFilterConfig;

/// Counts words that are not stopwords: whitespace tokens, lowercased and
/// punctuation-trimmed, that survive the stopword filter.
pub fn nonstop_word_count(text: &str, stop: &StopwordList) -> usize {
    trimmed_words(text).filter(|w| !stop.contains(w)).count()
}

/// Splits a normalized category name on stopwords: every maximal run of
/// consecutive non-stopword tokens becomes a candidate name. The full name is
/// always included.
pub fn split_category_name(name: &str, stop: &StopwordList) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(name.to_string());
    let mut run: Vec<&str> = Vec::new();
    for token in name.split_whitespace().chain(std::iter::once("")) {
        if token.is_empty() || stop.contains(token) {
            if !run.is_empty() {
                out.insert(run.join(" "));
                run.clear();
            }
        } else {
            run.push(token);
        }
    }
    out
}

fn starts_uppercase(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

fn is_connector(token: &str) -> bool {
    matches!(token.to_lowercase().as_str(), "of" | "and" | "for")
}

/// Extracts named-entity-like spans from a category name in its original
/// casing: maximal runs of capitalized tokens, optionally joined by the
/// connectors of/and/for. A span directly preceded by "the" keeps the
/// article ("the national register ..."). The first word of the name always
/// yields a single-token span, matching the capitalization convention of
/// category titles. All output is lowercased.
pub fn extract_entity_spans(original_cased_name: &str) -> BTreeSet<String> {
    let tokens: Vec<&str> = original_cased_name.split_whitespace().collect();
    let mut out = BTreeSet::new();
    if tokens.is_empty() {
        return out;
    }
    out.insert(tokens[0].to_lowercase());

    let mut i = 0;
    while i < tokens.len() {
        if !starts_uppercase(tokens[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i; // inclusive index of the last accepted token
        let mut j = i + 1;
        while j < tokens.len() {
            if starts_uppercase(tokens[j]) {
                end = j;
                j += 1;
            } else if is_connector(tokens[j])
                && j + 1 < tokens.len()
                && starts_uppercase(tokens[j + 1])
            {
                end = j + 1;
                j += 2;
            } else {
                break;
            }
        }
        let span = tokens[start..=end]
            .iter()
            .map(|t| t.to_lowercase())
            .collect::<Vec<_>>()
            .join(" ");
        if start > 0 && tokens[start - 1].eq_ignore_ascii_case("the") {
            out.insert(format!("the {span}"));
        } else {
            out.insert(span);
        }
        i = end + 1;
    }
    out
}

/// True when a normalized category name carries the token "disambiguation".
pub fn is_disambiguation(name: &str) -> bool {
    trimmed_words(name).any(|w| w == "disambiguation")
}

/// A category attached to a document: the normalized form used everywhere
/// plus the original casing needed for entity span extraction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CategoryName {
    pub normalized: String,
    pub original: String,
}

impl CategoryName {
    pub fn new(normalized: impl Into<String>, original: impl Into<String>) -> Self {
        CategoryName {
            normalized: normalized.into(),
            original: original.into(),
        }
    }
}

/// Expands a document's categories: the categories themselves, their graph
/// ancestors up to `cfg.max_ancestor_depth` edges, their stopword splits, and
/// their entity spans. Hidden and disambiguation names are removed from the
/// result afterwards, so they never leak in through any route.
pub fn expand_categories(
    cats: &[CategoryName],
    graph: &CategoryGraph,
    cfg: &WikiFilterConfig,
    stop: &StopwordList,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for cat in cats {
        out.insert(cat.normalized.clone());
        out.extend(graph.ancestors(&cat.normalized, cfg.max_ancestor_depth));
        out.extend(split_category_name(&cat.normalized, stop));
        out.extend(extract_entity_spans(&cat.original));
    }
    out.retain(|name| !cfg.hidden_categories.contains(name) && !is_disambiguation(name));
    out
}
