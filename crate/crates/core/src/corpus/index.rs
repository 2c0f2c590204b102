use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusError, Document};
use crate::rankers::{rank_documents, Query, RankedList, RankingError};

/// BM25 term-frequency saturation.
pub const BM25_K1: f64 = 1.2;
/// BM25 length normalization.
pub const BM25_B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc_id: String,
    pub term_frequency: usize,
}

/// Inverted index over title+body tokens.
///
/// Every map is ordered so that two builds from the same corpus serialize to
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: BTreeMap<String, usize>,
    doc_count: usize,
    avg_doc_length: f64,
}

/// Tokens that get indexed for a document: title first, then body.
pub fn indexed_tokens(doc: &Document) -> Vec<String> {
    let mut tokens = tokenize(&doc.title);
    tokens.extend(tokenize(&doc.body));
    tokens
}

pub fn build_index(corpus: &[Document]) -> Result<Index, CorpusError> {
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut doc_lengths = BTreeMap::new();

    for doc in corpus {
        if doc_lengths.contains_key(&doc.doc_id) {
            return Err(CorpusError::DuplicateDocId(doc.doc_id.clone()));
        }
        let tokens = indexed_tokens(doc);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for token in &tokens {
            *counts.entry(token.as_str()).or_default() += 1;
        }
        for (term, term_frequency) in counts {
            postings.entry(term.to_owned()).or_default().push(Posting {
                doc_id: doc.doc_id.clone(),
                term_frequency,
            });
        }
        doc_lengths.insert(doc.doc_id.clone(), tokens.len());
    }

    for list in postings.values_mut() {
        list.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    }

    let doc_count = doc_lengths.len();
    let avg_doc_length = if doc_count == 0 {
        0.0
    } else {
        doc_lengths.values().sum::<usize>() as f64 / doc_count as f64
    };

    Ok(Index {
        postings,
        doc_lengths,
        doc_count,
        avg_doc_length,
    })
}

impl Index {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<usize> {
        self.doc_lengths.get(doc_id).copied()
    }

    pub fn doc_lengths(&self) -> &BTreeMap<String, usize> {
        &self.doc_lengths
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    /// `ln((N - df + 0.5) / (df + 0.5) + 1)`, always positive.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count as f64;
        let df = self.document_frequency(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// BM25 contribution of one query term occurring `term_frequency` times
    /// in a document of `doc_length` tokens.
    pub fn bm25_term(&self, term: &str, term_frequency: usize, doc_length: usize) -> f64 {
        if term_frequency == 0 {
            return 0.0;
        }
        let tf = term_frequency as f64;
        let length_ratio = if self.avg_doc_length > 0.0 {
            doc_length as f64 / self.avg_doc_length
        } else {
            1.0
        };
        let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * length_ratio);
        self.idf(term) * tf * (BM25_K1 + 1.0) / (tf + norm)
    }

    /// BM25 score of an arbitrary token sequence against this index's
    /// collection statistics. Query terms are deduplicated, in order.
    pub fn bm25_score(&self, query_terms: &[String], tokens: &[String]) -> f64 {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for token in tokens {
            *counts.entry(token.as_str()).or_default() += 1;
        }
        unique_terms(query_terms)
            .into_iter()
            .map(|term| self.bm25_term(term, counts.get(term).copied().unwrap_or(0), tokens.len()))
            .sum()
    }
}

fn unique_terms(terms: &[String]) -> Vec<&str> {
    let mut seen = Vec::with_capacity(terms.len());
    for term in terms {
        if !seen.contains(&term.as_str()) {
            seen.push(term.as_str());
        }
    }
    seen
}

/// Candidate retrieval: every document sharing at least one term with the
/// query, ranked by BM25 and cut at `pool_size`.
pub fn bm25_retrieve(
    index: &Index,
    query: &Query,
    pool_size: usize,
) -> Result<RankedList, RankingError> {
    let mut accumulators: BTreeMap<&str, f64> = BTreeMap::new();
    for term in unique_terms(&query.terms) {
        for posting in index.postings(term) {
            let doc_length = index.doc_lengths[&posting.doc_id];
            // Summed in query-term order, same as `bm25_score`, so the two
            // paths agree bit for bit.
            let acc = accumulators.entry(posting.doc_id.as_str()).or_insert(0.0);
            *acc += index.bm25_term(term, posting.term_frequency, doc_length);
        }
    }
    rank_documents(
        query.clone(),
        accumulators
            .into_iter()
            .map(|(doc_id, score)| (doc_id.to_owned(), score)),
        pool_size,
    )
}
