use super::{Query, Ranker};
use crate::corpus::Index;

/// BM25 against the collection statistics of an [`Index`]. Documents need not
/// be in the index: perturbed variants are scored with their own length.
#[derive(Debug, Clone, Copy)]
pub struct Bm25Ranker<'a> {
    index: &'a Index,
}

impl<'a> Bm25Ranker<'a> {
    pub fn new(index: &'a Index) -> Self {
        Self { index }
    }
}

impl Ranker for Bm25Ranker<'_> {
    fn name(&self) -> &str {
        "bm25"
    }

    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64 {
        self.index.bm25_score(&query.terms, tokens)
    }
}
