use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// No stemming and no stopword removal: words such as "also" or "for" must
/// survive so they can show up in explanations.
pub fn tokenize(text: &str) -> Vec<String> {
    // Lowercase first: some uppercase letters lowercase into sequences that
    // contain combining marks, which must then be split like any other
    // non-alphanumeric character.
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|fragment| !fragment.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A token sequence together with its unique-term vocabulary.
///
/// The vocabulary is the interpretable feature space of the document: one
/// binary feature per unique term, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub vocabulary: BTreeSet<String>,
    pub term_positions: BTreeMap<String, Vec<usize>>,
}

impl TokenizedDocument {
    pub fn from_tokens(doc_id: impl Into<String>, tokens: Vec<String>) -> Self {
        let mut term_positions: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (position, token) in tokens.iter().enumerate() {
            term_positions.entry(token.clone()).or_default().push(position);
        }
        let vocabulary = term_positions.keys().cloned().collect();
        Self {
            doc_id: doc_id.into(),
            tokens,
            vocabulary,
            term_positions,
        }
    }

    pub fn from_text(doc_id: impl Into<String>, text: &str) -> Self {
        Self::from_tokens(doc_id, tokenize(text))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Vocabulary in feature order.
    pub fn features(&self) -> Vec<&str> {
        self.vocabulary.iter().map(String::as_str).collect()
    }

    pub fn term_frequency(&self, term: &str) -> usize {
        self.term_positions.get(term).map_or(0, Vec::len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowercases_and_splits() {
        assert_eq!(tokenize("Rail Strikes"), vec!["rail", "strikes"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ,;- ").is_empty());
    }

    #[test]
    fn punctuation_and_digits() {
        assert_eq!(
            tokenize("union-led walk-outs, 1989!"),
            vec!["union", "led", "walk", "outs", "1989"]
        );
    }

    #[test]
    fn stopwords_are_kept() {
        assert_eq!(tokenize("also for the"), vec!["also", "for", "the"]);
    }

    #[test]
    fn positions_and_vocabulary() {
        let doc = TokenizedDocument::from_text("d", "a b a c");
        assert_eq!(doc.features(), vec!["a", "b", "c"]);
        assert_eq!(doc.term_positions["a"], vec![0, 2]);
        assert_eq!(doc.term_frequency("a"), 2);
        assert_eq!(doc.term_frequency("z"), 0);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokenized_document_invariants(text in "[a-d ,.-]{0,60}") {
            let doc = TokenizedDocument::from_text("x", &text);
            let from_tokens: BTreeSet<String> = doc.tokens.iter().cloned().collect();
            prop_assert_eq!(&doc.vocabulary, &from_tokens);
            for positions in doc.term_positions.values() {
                for &p in positions {
                    prop_assert!(p < doc.tokens.len());
                }
            }
            for token in &doc.tokens {
                prop_assert!(!token.is_empty());
                prop_assert_eq!(token, &token.to_lowercase());
            }
        }
    }
}
