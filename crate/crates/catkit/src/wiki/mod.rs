//! Wikipedia ingest: SQL dump parsing, article cleanup, category expansion,
//! and assembly into a filtered document-category corpus.

pub mod categories;
pub mod markup;
pub mod sql;

pub use categories::{
    expand_categories, extract_entity_spans, is_disambiguation, nonstop_word_count,
    split_category_name, CategoryName,
};
pub use markup::{default_terminal_sections, strip_article, DEFAULT_TERMINAL_SECTIONS};
pub use sql::{escape_sql_string, SqlDumpParser, SqlRow, SqlValue};

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Read};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{
    normalize_category, normalize_category_cased, CategoryGraph, CorpusStats, Document, Source,
    StopwordList,
};
use crate::error::{Error, Result};

/// Namespace ids from the page table.
pub const NS_ARTICLE: i64 = 0;
pub const NS_CATEGORY: i64 = 14;

/// Column projections into the stock Wikimedia table layouts.
const PAGE_COLUMNS: &[usize] = &[0, 1, 2]; // page_id, page_namespace, page_title
const CATEGORYLINKS_COLUMNS: &[usize] = &[0, 1, 6]; // cl_from, cl_to, cl_type
const PAGE_PROPS_COLUMNS: &[usize] = &[0, 1]; // pp_page, pp_propname

/// A row of the page table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub page_id: u64,
    pub namespace: i64,
    pub title: String,
}

/// Kind of a categorylinks row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkType {
    Page,
    Subcat,
    File,
}

/// A membership edge from a page into a category. `to_category` is
/// normalized; `to_category_cased` keeps the dump casing for entity spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLink {
    pub from_page_id: u64,
    pub to_category: String,
    pub to_category_cased: String,
    pub link_type: LinkType,
}

/// Filtering and expansion knobs for the Wikipedia pipeline.
#[derive(Debug, Clone)]
pub struct WikiFilterConfig {
    /// Normalized names to drop, merged with the hiddencat page props.
    pub hidden_categories: BTreeSet<String>,
    pub min_nonstop_words: usize,
    pub max_ancestor_depth: usize,
    pub terminal_sections: Vec<String>,
}

impl Default for WikiFilterConfig {
    fn default() -> Self {
        WikiFilterConfig {
            hidden_categories: BTreeSet::new(),
            min_nonstop_words: 100,
            max_ancestor_depth: 2,
            terminal_sections: default_terminal_sections(),
        }
    }
}

/// Everything the Wikipedia build produces.
#[derive(Debug)]
pub struct WikiCorpus {
    pub documents: Vec<Document>,
    pub graph: CategoryGraph,
    pub stats: CorpusStats,
    pub counts: IngestCounts,
}

/// Per-run skip accounting; inconsistencies are counted, never fatal.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct IngestCounts {
    pub articles_seen: u64,
    pub skipped_short: u64,
    pub skipped_uncategorized: u64,
    pub skipped_non_article: u64,
    pub dangling_links: u64,
}

#[derive(Deserialize)]
struct RawArticle {
    id: ArticleId,
    #[allow(dead_code)]
    #[serde(default)]
    title: Option<String>,
    text: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ArticleId {
    Num(u64),
    Str(String),
}

impl ArticleId {
    fn as_string(&self) -> String {
        match self {
            ArticleId::Num(n) => n.to_string(),
            ArticleId::Str(s) => s.clone(),
        }
    }

    fn as_u64(&self) -> Option<u64> {
        match self {
            ArticleId::Num(n) => Some(*n),
            ArticleId::Str(s) => s.trim().parse().ok(),
        }
    }
}

/// Parses the page table into records.
pub fn parse_pages(reader: impl Read) -> impl Iterator<Item = Result<PageRecord>> {
    SqlDumpParser::new(reader, Some("page"), Some(PAGE_COLUMNS)).map(|row| {
        let row = row?;
        let page_id = row.values[0]
            .as_int()
            .ok_or_else(|| Error::InvalidInput("page_id is not an integer".into()))?
            as u64;
        let namespace = row.values[1]
            .as_int()
            .ok_or_else(|| Error::InvalidInput("page_namespace is not an integer".into()))?;
        let title = row.values[2]
            .as_str()
            .ok_or_else(|| Error::InvalidInput("page_title is not a string".into()))?
            .to_string();
        Ok(PageRecord {
            page_id,
            namespace,
            title,
        })
    })
}

/// Parses categorylinks rows. Yields `None` for rows whose target normalizes
/// to nothing.
pub fn parse_categorylinks(
    reader: impl Read,
) -> impl Iterator<Item = Result<Option<CategoryLink>>> {
    SqlDumpParser::new(reader, Some("categorylinks"), Some(CATEGORYLINKS_COLUMNS)).map(|row| {
        let row = row?;
        let from_page_id = row.values[0]
            .as_int()
            .ok_or_else(|| Error::InvalidInput("cl_from is not an integer".into()))?
            as u64;
        let to_raw = row.values[1]
            .as_str()
            .ok_or_else(|| Error::InvalidInput("cl_to is not a string".into()))?;
        let link_type = match row.values[2].as_str() {
            Some("subcat") => LinkType::Subcat,
            Some("file") => LinkType::File,
            _ => LinkType::Page,
        };
        let link = match (normalize_category(to_raw), normalize_category_cased(to_raw)) {
            (Some(to_category), Some(to_category_cased)) => Some(CategoryLink {
                from_page_id,
                to_category,
                to_category_cased,
                link_type,
            }),
            _ => None,
        };
        Ok(link)
    })
}

/// Page ids flagged with the `hiddencat` page property.
pub fn parse_hidden_page_ids(reader: impl Read) -> impl Iterator<Item = Result<Option<u64>>> {
    SqlDumpParser::new(reader, Some("page_props"), Some(PAGE_PROPS_COLUMNS)).map(|row| {
        let row = row?;
        let page = row.values[0]
            .as_int()
            .ok_or_else(|| Error::InvalidInput("pp_page is not an integer".into()))?
            as u64;
        Ok(match row.values[1].as_str() {
            Some("hiddencat") => Some(page),
            _ => None,
        })
    })
}

/// Builds the Wikipedia corpus from the four dump streams.
///
/// Category links join to articles by page id; the article text itself comes
/// from the extracted-text JSON stream. Page rows identify category pages
/// (for the subcat graph and hidden-category names) and veto extracted
/// entries that are not in the article namespace. Referential
/// inconsistencies between the streams are logged and skipped.
pub fn build_wiki_corpus(
    pages: impl Read,
    links: impl Read,
    page_props: impl Read,
    articles: impl BufRead,
    articles_path: &Path,
    cfg: &WikiFilterConfig,
) -> Result<WikiCorpus> {
    let stop = StopwordList::english();

    // Page table: namespaces plus category-page titles.
    let mut page_ns: HashMap<u64, i64> = HashMap::new();
    let mut category_titles: HashMap<u64, String> = HashMap::new();
    for record in parse_pages(pages) {
        let record = record?;
        page_ns.insert(record.page_id, record.namespace);
        if record.namespace == NS_CATEGORY {
            if let Some(norm) = normalize_category(&record.title) {
                category_titles.insert(record.page_id, norm);
            }
        }
    }

    // Hidden categories: hiddencat page props joined back to page titles.
    let mut effective = cfg.clone();
    for hidden_id in parse_hidden_page_ids(page_props) {
        if let Some(page_id) = hidden_id? {
            match category_titles.get(&page_id) {
                Some(norm) => {
                    effective.hidden_categories.insert(norm.clone());
                }
                None => log::warn!("hiddencat page prop for unknown page {page_id}"),
            }
        }
    }

    // Category links: article memberships and the subcat graph.
    let mut counts = IngestCounts::default();
    let mut graph = CategoryGraph::new();
    let mut article_cats: HashMap<u64, Vec<CategoryName>> = HashMap::new();
    for link in parse_categorylinks(links) {
        let Some(link) = link? else { continue };
        match link.link_type {
            LinkType::Subcat => match category_titles.get(&link.from_page_id) {
                Some(child) => graph.add_edge(child.clone(), link.to_category),
                None => {
                    counts.dangling_links += 1;
                    log::warn!(
                        "subcat link from page {} which is not a known category page",
                        link.from_page_id
                    );
                }
            },
            LinkType::Page => {
                article_cats
                    .entry(link.from_page_id)
                    .or_default()
                    .push(CategoryName::new(link.to_category, link.to_category_cased));
            }
            LinkType::File => {}
        }
    }

    // Article stream: clean, filter, expand.
    let mut documents = Vec::new();
    for (lineno, line) in articles.lines().enumerate() {
        let line = line.map_err(|e| Error::io(articles_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawArticle =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: articles_path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        counts.articles_seen += 1;

        let numeric_id = raw.id.as_u64();
        if let Some(ns) = numeric_id.and_then(|id| page_ns.get(&id)) {
            if *ns != NS_ARTICLE {
                counts.skipped_non_article += 1;
                continue;
            }
        }

        let text = strip_article(&raw.text, &effective.terminal_sections);
        if text.is_empty() || nonstop_word_count(&text, stop) < effective.min_nonstop_words {
            counts.skipped_short += 1;
            continue;
        }

        let cats = match numeric_id.and_then(|id| article_cats.get(&id)) {
            Some(cats) if !cats.is_empty() => cats,
            _ => {
                counts.skipped_uncategorized += 1;
                log::debug!("article {} has no category links", raw.id.as_string());
                continue;
            }
        };
        let categories = expand_categories(cats, &graph, &effective, stop);
        if categories.is_empty() {
            counts.skipped_uncategorized += 1;
            continue;
        }
        documents.push(Document {
            doc_id: raw.id.as_string(),
            source: Source::Wikipedia,
            text,
            categories,
        });
    }

    let stats = CorpusStats::from_docs(&documents);
    Ok(WikiCorpus {
        documents,
        graph,
        stats,
        counts,
    })
}

/// Hidden-category names from a sidecar override file: one name per line,
/// normalized on load.
pub fn load_hidden_override(path: &Path, reader: impl BufRead) -> Result<BTreeSet<String>> {
    let mut names = BTreeSet::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(norm) = normalize_category(&line) {
            names.insert(norm);
        }
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dumps_build_empty_corpus() {
        let corpus = build_wiki_corpus(
            "".as_bytes(),
            "".as_bytes(),
            "".as_bytes(),
            "".as_bytes(),
            Path::new("articles.jsonl"),
            &WikiFilterConfig::default(),
        )
        .unwrap();
        assert!(corpus.documents.is_empty());
        assert_eq!(corpus.stats.documents, 0);
        assert_eq!(corpus.graph.edge_count(), 0);
    }

    #[test]
    fn non_article_namespace_entries_are_skipped() {
        let pages = "INSERT INTO `page` VALUES (7,2,'User_page');";
        let long_text = (0..120).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let articles = format!("{{\"id\": 7, \"title\": \"User page\", \"text\": \"{long_text}\"}}\n");
        let corpus = build_wiki_corpus(
            pages.as_bytes(),
            "".as_bytes(),
            "".as_bytes(),
            articles.as_bytes(),
            Path::new("articles.jsonl"),
            &WikiFilterConfig::default(),
        )
        .unwrap();
        assert!(corpus.documents.is_empty());
        assert_eq!(corpus.counts.skipped_non_article, 1);
    }

    #[test]
    fn hidden_override_file_normalizes_names() {
        let input = "Tracking_categories\n  \nAll_Stub_Articles\n";
        let names = load_hidden_override(Path::new("mem"), input.as_bytes()).unwrap();
        assert!(names.contains("tracking categories"));
        assert!(names.contains("all stub articles"));
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn malformed_article_line_aborts_with_location() {
        let err = build_wiki_corpus(
            "".as_bytes(),
            "".as_bytes(),
            "".as_bytes(),
            "{broken\n".as_bytes(),
            Path::new("articles.jsonl"),
            &WikiFilterConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::MalformedRecord { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
