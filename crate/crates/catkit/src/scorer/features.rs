//! Hashed feature extraction for category-document pairs.
//!
//! A linear model over disjoint category and document features cannot express
//! their interaction, so the pair is featurized with hashed cross features:
//! every (category token, document token) combination gets its own slot in a
//! 2^bits space, alongside plain category-token features.

use std::collections::HashMap;

use crate::text::alnum_tokens;

/// 64-bit FNV-1a. Fixed constants; part of the model file contract.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Folds a 64-bit hash into `bits` bits by xoring the halves.
pub fn fold_hash(hash: u64, bits: u32) -> usize {
    debug_assert!((1..=32).contains(&bits));
    (((hash >> 32) ^ hash) & ((1u64 << bits) - 1)) as usize
}

/// Sparse feature vector: (index, count) pairs sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(index, count)| weights[index] * count)
            .sum()
    }
}

fn feature_index(tag: &str, parts: &[&str], bits: u32) -> usize {
    let mut buf = Vec::with_capacity(tag.len() + parts.iter().map(|p| p.len() + 1).sum::<usize>());
    buf.extend_from_slice(tag.as_bytes());
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            buf.push(b'|');
        }
        buf.extend_from_slice(part.as_bytes());
    }
    fold_hash(fnv1a_64(&buf), bits)
}

/// Featurizes a pair: `C:<cat token>` features for the category and
/// `X:<cat token>|<doc token>` cross features for every token combination,
/// with occurrence-count weights.
pub fn featurize(category: &str, document: &str, bits: u32) -> FeatureVector {
    let cat_tokens = alnum_tokens(category);
    let doc_tokens = alnum_tokens(document);
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for c in &cat_tokens {
        *counts.entry(feature_index("C:", &[c], bits)).or_insert(0.0) += 1.0;
    }
    for c in &cat_tokens {
        for d in &doc_tokens {
            *counts
                .entry(feature_index("X:", &[c, d], bits))
                .or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(index, _)| index);
    FeatureVector { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_and_cross_features_present_with_count_one() {
        let bits = 18;
        let fv = featurize("sports", "sports", bits);
        let c_index = fold_hash(fnv1a_64(b"C:sports"), bits);
        let x_index = fold_hash(fnv1a_64(b"X:sports|sports"), bits);
        let lookup = |i: usize| {
            fv.entries()
                .iter()
                .find(|&&(index, _)| index == i)
                .map(|&(_, count)| count)
        };
        assert_eq!(lookup(c_index), Some(1.0));
        assert_eq!(lookup(x_index), Some(1.0));
    }

    #[test]
    fn empty_document_yields_only_category_features() {
        let fv = featurize("world news", "", 18);
        assert_eq!(fv.entries().len(), 2);
    }

    #[test]
    fn golden_feature_multiset_for_fixed_pair() {
        // Reference computation: FNV-1a applied by hand to each feature
        // string, folded to 16 bits; counts from token multiplicity.
        let bits = 16;
        fn reference(s: &str) -> usize {
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for &b in s.as_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            (((h >> 32) ^ h) & 0xffff) as usize
        }
        let mut expected: Vec<(usize, f64)> = vec![
            (reference("C:peace"), 1.0),
            (reference("X:peace|treaty"), 2.0),
            (reference("X:peace|signed"), 1.0),
        ];
        expected.sort_unstable_by_key(|&(i, _)| i);
        let fv = featurize("peace", "treaty signed, treaty", bits);
        assert_eq!(fv.entries(), expected.as_slice());
    }

    #[test]
    fn indices_stay_below_the_hash_space() {
        for bits in [1u32, 8, 22] {
            let fv = featurize("a b c", "d e f g", bits);
            for &(index, count) in fv.entries() {
                assert!(index < (1usize << bits));
                assert!(count.is_finite());
            }
        }
    }

    #[test]
    fn dot_product_respects_counts() {
        let bits = 10;
        let fv = featurize("x", "y y", bits);
        let mut weights = vec![0.0; 1 << bits];
        for &(index, _) in fv.entries() {
            weights[index] = 1.0;
        }
        // C:x once + X:x|y twice.
        assert_eq!(fv.dot(&weights), 3.0);
    }
}
