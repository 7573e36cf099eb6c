//! Document-category scorers behind one interface: a trainable hashed-linear
//! model and a concept-similarity (tf-idf / cosine) index.

mod binio;
pub mod esa;
pub mod features;
pub mod linear;

pub use esa::{esa_build, EsaIndex, ESA_MAGIC, ESA_VERSION};
pub use features::{featurize, fnv1a_64, fold_hash, FeatureVector};
pub use linear::{lr_at, train_linear, LinearConfig, LinearScorerModel, LINEAR_MAGIC, LINEAR_VERSION};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Anything that can score how well a category describes a document.
/// Implementations are pure: the same pair always yields the same score, and
/// scoring may run concurrently.
pub trait Scorer: Send + Sync {
    fn score(&self, category: &str, document: &str) -> f64;
    fn kind(&self) -> &'static str;
}

impl Scorer for LinearScorerModel {
    fn score(&self, category: &str, document: &str) -> f64 {
        LinearScorerModel::score(self, category, document)
    }

    fn kind(&self) -> &'static str {
        "linear"
    }
}

impl Scorer for EsaIndex {
    fn score(&self, category: &str, document: &str) -> f64 {
        EsaIndex::score(self, category, document)
    }

    fn kind(&self) -> &'static str {
        "esa"
    }
}

/// Loads any supported model file, dispatching on its magic bytes.
pub fn load_scorer(path: &Path) -> Result<Box<dyn Scorer>> {
    let magic = binio::peek_magic(path)?;
    match &magic {
        m if m == LINEAR_MAGIC => Ok(Box::new(LinearScorerModel::load(path)?)),
        m if m == ESA_MAGIC => Ok(Box::new(EsaIndex::load(path)?)),
        other => Err(Error::ModelFormat(format!(
            "unrecognized model file magic {other:02x?}"
        ))),
    }
}

/// Writes the textual debug dump of any supported model file.
pub fn dump_scorer(path: &Path, w: impl Write) -> Result<()> {
    let magic = binio::peek_magic(path)?;
    match &magic {
        m if m == LINEAR_MAGIC => LinearScorerModel::load(path)?
            .debug_dump(w)
            .map_err(|e| Error::io(path, e)),
        m if m == ESA_MAGIC => EsaIndex::load(path)?
            .debug_dump(w)
            .map_err(|e| Error::io(path, e)),
        other => Err(Error::ModelFormat(format!(
            "unrecognized model file magic {other:02x?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Source};
    use crate::sampler::TrainingExample;

    #[test]
    fn both_model_kinds_load_through_the_common_interface() {
        let dir = tempfile::tempdir().unwrap();

        let linear_path = dir.path().join("model.bin");
        let examples = vec![
            TrainingExample {
                category: "a".into(),
                document: "x y".into(),
                label: 1,
                doc_id: "1".into(),
            },
            TrainingExample {
                category: "b".into(),
                document: "x y".into(),
                label: 0,
                doc_id: "1".into(),
            },
        ];
        let config = LinearConfig {
            bits: 10,
            ..LinearConfig::default()
        };
        train_linear(&examples, &config)
            .unwrap()
            .save(&linear_path)
            .unwrap();

        let esa_path = dir.path().join("index.esa");
        let docs = vec![
            Document::new("d1", Source::Wikipedia, "alpha beta gamma", ["c".to_string()]),
            Document::new("d2", Source::Wikipedia, "delta epsilon", ["c".to_string()]),
        ];
        esa_build(&docs, 1, 1.0).unwrap().save(&esa_path).unwrap();

        let linear = load_scorer(&linear_path).unwrap();
        let esa = load_scorer(&esa_path).unwrap();
        assert_eq!(linear.kind(), "linear");
        assert_eq!(esa.kind(), "esa");
        assert!(linear.score("a", "x y") > 0.0);
        assert_eq!(esa.score("alpha", "alpha"), 1.0);
    }

    #[test]
    fn unknown_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"JUNKJUNKJUNK").unwrap();
        assert!(matches!(load_scorer(&path), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn scores_stay_in_the_open_unit_interval() {
        let config = LinearConfig {
            bits: 8,
            ..LinearConfig::default()
        };
        let model = LinearScorerModel::zeroed(config);
        for (c, d) in [("a", "b"), ("", ""), ("long category name", "text")] {
            let s = Scorer::score(&model, c, d);
            assert!(s > 0.0 && s < 1.0);
        }
    }
}
