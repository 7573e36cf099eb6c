//! Shared tokenization helpers.

/// Whitespace-delimited words, lowercased, with non-alphanumeric characters
/// trimmed from both ends. Empty results are dropped.
pub fn trimmed_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|w| {
        let trimmed = w.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            None
        } else {
            Some(trimmed.to_lowercase())
        }
    })
}

/// Lowercase tokens formed by maximal alphanumeric runs; punctuation and
/// whitespace both separate tokens.
pub fn alnum_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_words_strip_punctuation() {
        let words: Vec<String> = trimmed_words("The quick, brown fox.").collect();
        assert_eq!(words, ["the", "quick", "brown", "fox"]);
    }

    #[test]
    fn alnum_tokens_split_on_punctuation() {
        assert_eq!(alnum_tokens("Don't panic!"), ["don", "t", "panic"]);
        assert_eq!(alnum_tokens("  "), Vec::<String>::new());
    }
}
