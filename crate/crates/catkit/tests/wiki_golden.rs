//! Golden-file test for the Wikipedia ingest pipeline: hand-built mini dumps
//! must produce byte-identical shards, with hidden and disambiguation
//! categories absent and ancestor expansion stopping at two edges.

use std::fs;
use std::path::{Path, PathBuf};

use catkit::corpus::write_shards;
use catkit::wiki::{build_wiki_corpus, WikiFilterConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/wiki")
        .join(name)
}

fn build() -> catkit::wiki::WikiCorpus {
    let articles = fs::File::open(fixture("articles.jsonl")).unwrap();
    build_wiki_corpus(
        fs::File::open(fixture("page.sql")).unwrap(),
        fs::File::open(fixture("categorylinks.sql")).unwrap(),
        fs::File::open(fixture("page_props.sql")).unwrap(),
        std::io::BufReader::new(articles),
        &fixture("articles.jsonl"),
        &WikiFilterConfig::default(),
    )
    .unwrap()
}

#[test]
fn golden_shards_byte_identical() {
    let corpus = build();
    assert_eq!(corpus.documents.len(), 4);

    let out = tempfile::tempdir().unwrap();
    write_shards(corpus.documents, out.path(), 3).unwrap();

    for shard in ["shard-00000.jsonl", "shard-00001.jsonl"] {
        let got = fs::read(out.path().join(shard)).unwrap();
        let want = fs::read(fixture("golden").join(shard)).unwrap();
        assert_eq!(
            got,
            want,
            "shard {shard} differs:\n--- got ---\n{}\n--- want ---\n{}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(&want)
        );
    }
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 2);
}

#[test]
fn hidden_and_disambiguation_categories_absent() {
    let corpus = build();
    for doc in &corpus.documents {
        assert!(!doc.categories.contains("hidden tracking"), "{:?}", doc.doc_id);
        for cat in &doc.categories {
            assert!(!cat.split_whitespace().any(|w| w == "disambiguation"));
        }
    }
}

#[test]
fn depth_three_ancestor_excluded() {
    let corpus = build();
    // renewable energy -> energy technology -> technology -> artificial
    // objects: the third hop must not appear on any document.
    let with_chain: Vec<_> = corpus
        .documents
        .iter()
        .filter(|d| d.categories.contains("renewable energy"))
        .collect();
    assert_eq!(with_chain.len(), 2);
    for doc in with_chain {
        assert!(doc.categories.contains("energy technology"));
        assert!(doc.categories.contains("technology"));
        assert!(!doc.categories.contains("artificial objects"));
    }
}

#[test]
fn graph_tsv_matches_golden() {
    let corpus = build();
    let mut buf = Vec::new();
    corpus.graph.write_tsv(&mut buf).unwrap();
    let want = fs::read(fixture("golden/graph.tsv")).unwrap();
    assert_eq!(buf, want);
}

#[test]
fn fixture_stats_hand_checked() {
    let corpus = build();
    assert_eq!(corpus.stats.documents, 4);
    // Unique categories over the four documents:
    // {energy technology, renewable, renewable energy, technology} (docs 1-2)
    // + {energy, energy conversion, hidden} + {power, power stations} = 9.
    assert_eq!(corpus.stats.unique_categories, 9);
    // (4 + 4 + 3 + 2) / 4.
    assert!((corpus.stats.avg_categories_per_doc - 13.0 / 4.0).abs() < 1e-12);
    assert_eq!(corpus.stats.mode_categories_per_doc, 4);
    assert_eq!(corpus.counts.skipped_short, 1);
    assert_eq!(corpus.counts.articles_seen, 5);
}

#[test]
fn pipeline_is_deterministic() {
    let a = build();
    let b = build();
    assert_eq!(a.documents, b.documents);
    assert_eq!(a.graph, b.graph);
}
