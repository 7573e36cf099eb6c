//! Fixed English stopword list.
//!
//! Category-name splitting and the non-stopword length filter both depend on
//! the exact membership of this list, so it is embedded and version-tagged
//! rather than loaded from the environment.

use std::collections::HashSet;

/// The classic 127-word English stopword list.
const ENGLISH_127: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for",
    "with", "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
    "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
    "should", "now",
];

/// An immutable set of lowercase stopwords with a version tag.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<&'static str>,
    version: &'static str,
}

impl StopwordList {
    /// The embedded English list used by every pipeline in this crate.
    pub fn english() -> &'static StopwordList {
        use std::sync::OnceLock;
        static LIST: OnceLock<StopwordList> = OnceLock::new();
        LIST.get_or_init(|| StopwordList {
            words: ENGLISH_127.iter().copied().collect(),
            version: "english-127.v1",
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn version(&self) -> &str {
        self.version
    }
}
