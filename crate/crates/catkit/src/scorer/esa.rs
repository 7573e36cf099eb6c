//! Concept-space similarity scorer: texts are mapped into sparse vectors
//! over corpus documents (one concept per document) through a tf-idf
//! inverted index, and compared by cosine.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::binio::{self, HashingWriter, PayloadReader};
use crate::corpus::{Document, StopwordList};
use crate::error::{Error, Result};
use crate::text::alnum_tokens;

pub const ESA_MAGIC: &[u8; 4] = b"CKEI";
pub const ESA_VERSION: u32 = 1;

/// Inverted tf-idf index from terms to concept (document) space.
#[derive(Debug, Clone, PartialEq)]
pub struct EsaIndex {
    /// term -> term id (ids assigned in sorted term order).
    vocabulary: BTreeMap<String, u32>,
    /// term id -> (concept id, tf-idf weight), sorted by concept id.
    postings: Vec<Vec<(u32, f64)>>,
    /// term id -> document frequency.
    doc_frequency: Vec<u32>,
    /// concept id -> concept name (the source document id).
    concept_names: Vec<String>,
}

impl EsaIndex {
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn concept_count(&self) -> usize {
        self.concept_names.len()
    }

    pub fn concept_name(&self, concept_id: u32) -> Option<&str> {
        self.concept_names.get(concept_id as usize).map(String::as_str)
    }

    pub fn doc_frequency(&self, term: &str) -> Option<u32> {
        self.vocabulary
            .get(term)
            .map(|&id| self.doc_frequency[id as usize])
    }

    /// The concept vector of a text: the sum of its tokens' posting rows
    /// (token multiplicity contributes).
    pub fn concept_vector(&self, text: &str) -> HashMap<u32, f64> {
        let stop = StopwordList::english();
        let mut vector = HashMap::new();
        for token in alnum_tokens(text) {
            if stop.contains(&token) {
                continue;
            }
            if let Some(&term_id) = self.vocabulary.get(&token) {
                for &(concept, weight) in &self.postings[term_id as usize] {
                    *vector.entry(concept).or_insert(0.0) += weight;
                }
            }
        }
        vector
    }

    /// Cosine similarity of the two texts' concept vectors, in [0, 1].
    /// Zero when either text maps to nothing.
    pub fn score(&self, category: &str, document: &str) -> f64 {
        if category == document {
            // Identical texts have identical concept vectors; their cosine
            // is exactly 1 whenever the vector is non-empty.
            return if self.concept_vector(category).is_empty() {
                0.0
            } else {
                1.0
            };
        }
        let a = self.concept_vector(category);
        let b = self.concept_vector(document);
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let (small, large) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
        let mut dot = 0.0;
        for (concept, weight) in small {
            if let Some(other) = large.get(concept) {
                dot += weight * other;
            }
        }
        if dot == 0.0 {
            return 0.0;
        }
        let norm_a: f64 = a.values().map(|w| w * w).sum::<f64>().sqrt();
        let norm_b: f64 = b.values().map(|w| w * w).sum::<f64>().sqrt();
        (dot / (norm_a * norm_b)).clamp(0.0, 1.0)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = HashingWriter::new(BufWriter::new(file));
        let io = |e| Error::io(path, e);
        w.write_all(ESA_MAGIC).map_err(io)?;
        binio::write_u32(&mut w, ESA_VERSION).map_err(io)?;
        binio::write_u64(&mut w, self.concept_names.len() as u64).map_err(io)?;
        for name in &self.concept_names {
            binio::write_string(&mut w, name).map_err(io)?;
        }
        binio::write_u64(&mut w, self.vocabulary.len() as u64).map_err(io)?;
        for (term, &term_id) in &self.vocabulary {
            binio::write_string(&mut w, term).map_err(io)?;
            binio::write_u32(&mut w, term_id).map_err(io)?;
            binio::write_u32(&mut w, self.doc_frequency[term_id as usize]).map_err(io)?;
            let row = &self.postings[term_id as usize];
            binio::write_u32(&mut w, row.len() as u32).map_err(io)?;
            for &(concept, weight) in row {
                binio::write_u32(&mut w, concept).map_err(io)?;
                binio::write_f64(&mut w, weight).map_err(io)?;
            }
        }
        let mut inner = w.finish().map_err(io)?;
        inner.flush().map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let payload = binio::read_checksummed(path)?;
        let mut r = PayloadReader::new(&payload);
        r.magic(ESA_MAGIC)?;
        let version = r.u32()?;
        if version != ESA_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: ESA_VERSION,
            });
        }
        let n_concepts = r.u64()? as usize;
        let mut concept_names = Vec::with_capacity(n_concepts);
        for _ in 0..n_concepts {
            concept_names.push(r.string()?);
        }
        let n_terms = r.u64()? as usize;
        let mut vocabulary = BTreeMap::new();
        let mut postings = vec![Vec::new(); n_terms];
        let mut doc_frequency = vec![0u32; n_terms];
        for _ in 0..n_terms {
            let term = r.string()?;
            let term_id = r.u32()? as usize;
            if term_id >= n_terms {
                return Err(Error::ModelFormat(format!(
                    "term id {term_id} out of range"
                )));
            }
            doc_frequency[term_id] = r.u32()?;
            let row_len = r.u32()? as usize;
            let mut row = Vec::with_capacity(row_len);
            for _ in 0..row_len {
                let concept = r.u32()?;
                let weight = r.f64()?;
                row.push((concept, weight));
            }
            postings[term_id] = row;
            vocabulary.insert(term, term_id as u32);
        }
        r.done()?;
        Ok(EsaIndex {
            vocabulary,
            postings,
            doc_frequency,
            concept_names,
        })
    }

    /// Human-readable dump of the vocabulary and postings.
    pub fn debug_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "esa-index concepts={} terms={}",
            self.concept_names.len(),
            self.vocabulary.len()
        )?;
        for (term, &term_id) in &self.vocabulary {
            let row = &self.postings[term_id as usize];
            write!(w, "{term}\tdf={}", self.doc_frequency[term_id as usize])?;
            for (concept, weight) in row {
                write!(w, "\t{}:{weight}", self.concept_names[*concept as usize])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Builds the index over a corpus: one concept per document, term weights
/// tf * ln(N/df), terms with df outside [min_df, max_df_fraction * N]
/// dropped. All concepts are kept for every term.
pub fn esa_build(docs: &[Document], min_df: u32, max_df_fraction: f64) -> Result<EsaIndex> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("cannot build an index from an empty corpus".into()));
    }
    let stop = StopwordList::english();
    let total_docs = docs.len() as f64;

    // Token counts per document, then document frequencies.
    let mut doc_tokens: Vec<HashMap<String, u32>> = Vec::with_capacity(docs.len());
    let mut df: HashMap<&str, u32> = HashMap::new();
    for doc in docs {
        let mut counts: HashMap<String, u32> = HashMap::new();
        for token in alnum_tokens(&doc.text) {
            if !stop.contains(&token) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        doc_tokens.push(counts);
    }
    for counts in &doc_tokens {
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }

    let max_df = max_df_fraction * total_docs;
    let mut vocabulary = BTreeMap::new();
    for (term, &frequency) in &df {
        if frequency >= min_df && (frequency as f64) <= max_df {
            let next_id = vocabulary.len() as u32;
            vocabulary.insert(term.to_string(), next_id);
        }
    }
    if vocabulary.is_empty() {
        return Err(Error::InvalidInput(
            "vocabulary is empty after document-frequency pruning".into(),
        ));
    }
    // BTreeMap insertion order above depends on HashMap iteration; reassign
    // ids in sorted term order for determinism.
    for (index, (_, id)) in vocabulary.iter_mut().enumerate() {
        *id = index as u32;
    }

    let mut doc_frequency = vec![0u32; vocabulary.len()];
    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vocabulary.len()];
    for (term, &term_id) in &vocabulary {
        doc_frequency[term_id as usize] = df[term.as_str()];
    }
    for (concept_id, counts) in doc_tokens.iter().enumerate() {
        for (term, &tf) in counts {
            if let Some(&term_id) = vocabulary.get(term) {
                let idf = (total_docs / doc_frequency[term_id as usize] as f64).ln();
                postings[term_id as usize].push((concept_id as u32, tf as f64 * idf));
            }
        }
    }
    // Documents were scanned in order, but per-document term iteration is
    // hash-ordered; restore sorted concept order per row.
    for row in &mut postings {
        row.sort_unstable_by_key(|&(concept, _)| concept);
    }

    Ok(EsaIndex {
        vocabulary,
        postings,
        doc_frequency,
        concept_names: docs.iter().map(|d| d.doc_id.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, Source::Wikipedia, text, ["c".to_string()])
    }

    fn mini_corpus() -> Vec<Document> {
        vec![
            doc("dogs", "dog puppy leash bark dog"),
            doc("finance", "stock market trading stock"),
            doc("pets", "dog cat leash collar"),
        ]
    }

    #[test]
    fn idf_is_ln_n_over_df() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        // "bark" appears once in one of three documents: weight = 1 * ln 3.
        let term_id = index.vocabulary["bark"] as usize;
        assert_eq!(index.postings[term_id].len(), 1);
        let (_, weight) = index.postings[term_id][0];
        assert!((weight - 3.0f64.ln()).abs() < 1e-12);
        // "dog" has df 2: idf = ln(3/2); tf 2 in the first document.
        let dog_id = index.vocabulary["dog"] as usize;
        let first = index.postings[dog_id][0];
        assert!((first.1 - 2.0 * (3.0f64 / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn ubiquitous_term_pruned_by_max_df() {
        let docs = vec![
            doc("a", "shared alpha"),
            doc("b", "shared beta"),
            doc("c", "shared gamma"),
        ];
        let index = esa_build(&docs, 1, 0.5).unwrap();
        assert!(!index.vocabulary.contains_key("shared"));
        assert!(index.vocabulary.contains_key("alpha"));
    }

    #[test]
    fn min_df_pruning_and_empty_vocabulary_error() {
        let docs = vec![doc("a", "unique words only")];
        assert!(esa_build(&docs, 2, 1.0).is_err());
    }

    #[test]
    fn golden_index_against_hand_tfidf() {
        // Independent tf-idf computation for the mini corpus with min_df 1,
        // max_df 1.0: N = 3.
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        let ln3 = 3.0f64.ln();
        let ln32 = (3.0f64 / 2.0).ln();
        // leash: df 2, tf 1 in docs 0 and 2.
        let leash = &index.postings[index.vocabulary["leash"] as usize];
        assert_eq!(leash.as_slice(), &[(0, ln32), (2, ln32)]);
        // stock: df 1, tf 2 in doc 1.
        let stock = &index.postings[index.vocabulary["stock"] as usize];
        assert_eq!(stock.as_slice(), &[(1, 2.0 * ln3)]);
        // cat: df 1, tf 1 in doc 2.
        let cat = &index.postings[index.vocabulary["cat"] as usize];
        assert_eq!(cat.as_slice(), &[(2, ln3)]);
    }

    #[test]
    fn identical_in_vocabulary_texts_score_one() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        assert_eq!(index.score("dog leash", "dog leash"), 1.0);
    }

    #[test]
    fn disjoint_concept_texts_score_zero() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        assert_eq!(index.score("bark", "trading"), 0.0);
        assert_eq!(index.score("", "dog"), 0.0);
        assert_eq!(index.score("zzz-unknown", "dog"), 0.0);
    }

    #[test]
    fn on_topic_document_scores_higher() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        let dogs = index.score("dog", "puppy bark leash");
        let finance = index.score("dog", "stock market trading");
        assert!(dogs > finance, "{dogs} <= {finance}");
    }

    #[test]
    fn save_load_round_trip() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.esa");
        index.save(&path).unwrap();
        let loaded = EsaIndex::load(&path).unwrap();
        assert_eq!(index, loaded);
        assert_eq!(
            index.score("dog", "leash collar"),
            loaded.score("dog", "leash collar")
        );
    }

    #[test]
    fn corrupted_index_detected() {
        let index = esa_build(&mini_corpus(), 1, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.esa");
        index.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            EsaIndex::load(&path),
            Err(Error::Corrupt { .. })
        ));
    }
}
