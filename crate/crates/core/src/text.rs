//! Tokenization shared by the index and the term recommender.

use unicode_segmentation::UnicodeSegmentation;

/// Splits text on Unicode word boundaries and lowercases every token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(str::to_lowercase).collect()
}

/// Normalized form of a controlled term used for exact keyword matching.
pub fn normalize_keyword(term: &str) -> String {
    term.trim().to_lowercase()
}
