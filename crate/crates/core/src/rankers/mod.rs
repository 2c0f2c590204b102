//! The pointwise ranker contract and the rankers shipped with the crate.
//!
//! A ranker maps a (query, token sequence) pair to a finite relevance score;
//! higher means more relevant. The explainer never looks past this contract,
//! so anything implementing [`Ranker`] can be explained, closures included.

mod bm25;
mod embedding;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bm25::Bm25Ranker;
pub use embedding::{embedding_score, load_embeddings, EmbeddingError, EmbeddingRanker, EmbeddingTable};

use crate::corpus::{tokenize, Index, TokenizedDocument};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub raw: String,
    pub terms: Vec<String>,
}

impl Query {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let terms = tokenize(&raw);
        Self { raw, terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

pub trait Ranker: Send + Sync {
    fn name(&self) -> &str {
        "custom"
    }

    /// Scores a raw token sequence. Must be deterministic.
    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64;

    fn score(&self, query: &Query, doc: &TokenizedDocument) -> f64 {
        self.score_tokens(query, &doc.tokens)
    }
}

impl<F> Ranker for F
where
    F: Fn(&Query, &[String]) -> f64 + Send + Sync,
{
    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64 {
        self(query, tokens)
    }
}

/// Planted ranker: the number of distinct query terms present in the
/// document. Its ground truth is linear in term presence, which makes it the
/// reference blackbox for checking that explanations recover real signal.
#[derive(Debug, Clone, Copy, Default)]
pub struct QueryTermCount;

impl Ranker for QueryTermCount {
    fn name(&self) -> &str {
        "query-term-count"
    }

    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64 {
        let mut terms: Vec<&String> = query.terms.iter().collect();
        terms.sort();
        terms.dedup();
        terms.into_iter().filter(|t| tokens.contains(t)).count() as f64
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("rank depth k must be at least 1")]
    ZeroDepth,
    #[error("ranker produced a non-finite score {score} for document \"{doc_id}\"")]
    NonFiniteScore { doc_id: String, score: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
}

/// Top-k documents for a query, sorted by score descending with ties broken
/// by doc_id ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    query: Query,
    entries: Vec<RankedEntry>,
    k: usize,
}

fn by_score_then_id(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

/// Sorts scored candidates into a [`RankedList`] of depth `k`. The output
/// depends only on the (doc_id, score) pairs, never on their input order.
pub fn rank_documents(
    query: Query,
    candidates: impl IntoIterator<Item = (String, f64)>,
    k: usize,
) -> Result<RankedList, RankingError> {
    if k == 0 {
        return Err(RankingError::ZeroDepth);
    }
    let mut entries = Vec::new();
    for (doc_id, score) in candidates {
        if !score.is_finite() {
            return Err(RankingError::NonFiniteScore { doc_id, score });
        }
        entries.push(RankedEntry { doc_id, score });
    }
    entries.sort_by(by_score_then_id);
    entries.truncate(k);
    Ok(RankedList { query, entries, k })
}

impl RankedList {
    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    /// Requested depth; `len()` can be smaller when fewer candidates exist.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// 1-based rank of `doc_id`.
    pub fn rank_of(&self, doc_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.doc_id == doc_id)
            .map(|i| i + 1)
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.rank_of(doc_id).is_some()
    }

    /// The first `k` entries as a list of depth `k`.
    pub fn truncated(&self, k: usize) -> Result<RankedList, RankingError> {
        if k == 0 {
            return Err(RankingError::ZeroDepth);
        }
        Ok(RankedList {
            query: self.query.clone(),
            entries: self.entries.iter().take(k).cloned().collect(),
            k,
        })
    }
}

/// Identifiers of the rankers a [`RankerSet`] can serve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankerKind {
    Bm25,
    Embed,
}

impl RankerKind {
    pub const ALL: [RankerKind; 2] = [RankerKind::Bm25, RankerKind::Embed];

    pub fn as_str(self) -> &'static str {
        match self {
            RankerKind::Bm25 => "bm25",
            RankerKind::Embed => "embed",
        }
    }
}

impl fmt::Display for RankerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RankerError {
    #[error("unknown ranker \"{name}\"; available rankers: {}", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("ranker \"{0}\" is not loaded (no embedding table configured)")]
    NotLoaded(RankerKind),
    #[error("query has no terms after tokenization")]
    EmptyQuery,
}

impl FromStr for RankerKind {
    type Err = RankerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RankerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RankerError::Unknown {
                name: s.to_owned(),
                available: RankerKind::ALL.iter().map(|k| k.as_str().to_owned()).collect(),
            })
    }
}

/// Registry resolving ranker identifiers against loaded resources.
#[derive(Debug, Clone, Copy)]
pub struct RankerSet<'a> {
    index: &'a Index,
    embeddings: Option<&'a EmbeddingTable>,
}

impl<'a> RankerSet<'a> {
    pub fn new(index: &'a Index, embeddings: Option<&'a EmbeddingTable>) -> Self {
        Self { index, embeddings }
    }

    pub fn available(&self) -> Vec<RankerKind> {
        RankerKind::ALL
            .into_iter()
            .filter(|k| *k != RankerKind::Embed || self.embeddings.is_some())
            .collect()
    }

    pub fn resolve(&self, name: &str) -> Result<RankerKind, RankerError> {
        let kind = name.parse::<RankerKind>().map_err(|_| RankerError::Unknown {
            name: name.to_owned(),
            available: self.available().iter().map(|k| k.as_str().to_owned()).collect(),
        })?;
        if !self.available().contains(&kind) {
            return Err(RankerError::NotLoaded(kind));
        }
        Ok(kind)
    }

    pub fn get(&self, name: &str) -> Result<Box<dyn Ranker + 'a>, RankerError> {
        Ok(match self.resolve(name)? {
            RankerKind::Bm25 => Box::new(Bm25Ranker::new(self.index)),
            RankerKind::Embed => Box::new(EmbeddingRanker::new(
                self.embeddings.ok_or(RankerError::NotLoaded(RankerKind::Embed))?,
            )),
        })
    }

    pub fn score(
        &self,
        name: &str,
        query: &Query,
        doc: &TokenizedDocument,
    ) -> Result<f64, RankerError> {
        let ranker = self.get(name)?;
        if query.is_empty() {
            return Err(RankerError::EmptyQuery);
        }
        Ok(ranker.score(query, doc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, Document};
    use proptest::prelude::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_text("rail 1 0\nstrikes 0 1\n").unwrap()
    }

    #[test]
    fn unknown_ranker_lists_available() {
        let index = build_index(&[]).unwrap();
        let t = table();
        let set = RankerSet::new(&index, Some(&t));
        let err = set.get("drmm2").err().unwrap();
        assert_eq!(
            err,
            RankerError::Unknown {
                name: "drmm2".into(),
                available: vec!["bm25".into(), "embed".into()]
            }
        );
        assert!(err.to_string().contains("bm25, embed"));
    }

    #[test]
    fn embed_requires_table() {
        let index = build_index(&[]).unwrap();
        let set = RankerSet::new(&index, None);
        assert_eq!(set.available(), vec![RankerKind::Bm25]);
        assert_eq!(set.get("embed").err().unwrap(), RankerError::NotLoaded(RankerKind::Embed));
    }

    #[test]
    fn registry_scores_are_deterministic() {
        let index = build_index(&[Document::new("1", "", "rail strikes spread")]).unwrap();
        let t = table();
        let set = RankerSet::new(&index, Some(&t));
        let doc = TokenizedDocument::from_text("1", "rail strikes spread");
        let q = Query::new("rail");
        for name in ["bm25", "embed"] {
            let a = set.score(name, &q, &doc).unwrap();
            let b = set.score(name, &q, &doc).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(set.score("bm25", &Query::new("!"), &doc), Err(RankerError::EmptyQuery));
    }

    #[test]
    fn bm25_zero_without_matches() {
        let index = build_index(&[Document::new("1", "", "rail strikes")]).unwrap();
        let set = RankerSet::new(&index, None);
        let doc = TokenizedDocument::from_text("2", "weather report");
        assert_eq!(set.score("bm25", &Query::new("rail"), &doc).unwrap(), 0.0);
    }

    #[test]
    fn embed_on_query_text_is_one() {
        let index = build_index(&[]).unwrap();
        let t = table();
        let set = RankerSet::new(&index, Some(&t));
        let doc = TokenizedDocument::from_text("q", "rail strikes");
        let s = set.score("embed", &Query::new("rail strikes"), &doc).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn query_term_count() {
        let q = Query::new("rail strikes rail");
        let tokens: Vec<String> = ["rail", "x", "rail"].iter().map(|s| s.to_string()).collect();
        assert_eq!(QueryTermCount.score_tokens(&q, &tokens), 1.0);
    }

    #[test]
    fn ranked_list_helpers() {
        let list = rank_documents(
            Query::new("q"),
            vec![("b".into(), 1.0), ("a".into(), 1.0), ("c".into(), 3.0)],
            2,
        )
        .unwrap();
        assert_eq!(list.rank_of("c"), Some(1));
        assert_eq!(list.rank_of("a"), Some(2));
        assert_eq!(list.rank_of("b"), None);
        assert_eq!(list.truncated(1).unwrap().scores(), vec![3.0]);
        assert!(matches!(
            rank_documents(Query::new("q"), vec![("a".into(), f64::NAN)], 2),
            Err(RankingError::NonFiniteScore { .. })
        ));
    }

    proptest! {
        #[test]
        fn ranking_ignores_candidate_order(
            scores in proptest::collection::vec(-3i32..3, 0..12),
            k in 1usize..8,
            rotate in 0usize..12,
        ) {
            let candidates: Vec<(String, f64)> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| (format!("d{i:02}"), s as f64 / 2.0))
                .collect();
            let mut permuted = candidates.clone();
            permuted.reverse();
            if !permuted.is_empty() {
                let r = rotate % permuted.len();
                permuted.rotate_left(r);
            }
            let a = rank_documents(Query::new("q"), candidates.clone(), k).unwrap();
            let b = rank_documents(Query::new("q"), permuted, k).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.len(), k.min(candidates.len()));
            for pair in a.entries().windows(2) {
                prop_assert!(
                    pair[0].score > pair[1].score
                        || (pair[0].score == pair[1].score && pair[0].doc_id < pair[1].doc_id)
                );
            }
        }
    }
}
