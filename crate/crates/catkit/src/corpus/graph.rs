//! Directed child-to-parent category relation.
//!
//! Real category data is cyclic, so every traversal is a visited-set BFS that
//! terminates regardless of graph shape.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Child category -> set of parent categories. Node names are normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryGraph {
    edges: BTreeMap<String, BTreeSet<String>>,
}

impl CategoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, child: impl Into<String>, parent: impl Into<String>) {
        self.edges.entry(child.into()).or_default().insert(parent.into());
    }

    pub fn parents(&self, cat: &str) -> Option<&BTreeSet<String>> {
        self.edges.get(cat)
    }

    /// Number of child nodes with at least one outgoing edge.
    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(|p| p.len()).sum()
    }

    /// All categories reachable from `cat` via 1..=`max_depth` child->parent
    /// edges. `cat` itself is never included; an unknown `cat` yields the
    /// empty set.
    pub fn ancestors(&self, cat: &str, max_depth: usize) -> BTreeSet<String> {
        let mut found = BTreeSet::new();
        if max_depth == 0 {
            return found;
        }
        let mut visited = BTreeSet::new();
        visited.insert(cat);
        let mut frontier = VecDeque::new();
        frontier.push_back((cat, 0usize));
        while let Some((node, depth)) = frontier.pop_front() {
            if depth == max_depth {
                continue;
            }
            if let Some(parents) = self.edges.get(node) {
                for parent in parents {
                    if visited.insert(parent) {
                        found.insert(parent.clone());
                        frontier.push_back((parent, depth + 1));
                    }
                }
            }
        }
        found
    }

    /// Serializes as tab-separated `child<TAB>parent` lines, sorted.
    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        for (child, parents) in &self.edges {
            for parent in parents {
                writeln!(w, "{child}\t{parent}")?;
            }
        }
        Ok(())
    }

    pub fn read_tsv(path: &Path, r: impl BufRead) -> Result<Self> {
        let mut graph = CategoryGraph::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (child, parent) = line.split_once('\t').ok_or_else(|| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected child<TAB>parent".into(),
            })?;
            graph.add_edge(child, parent);
        }
        Ok(graph)
    }
}
