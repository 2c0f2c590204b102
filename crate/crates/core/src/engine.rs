//! Request-level operations shared by the HTTP service and the CLI.
//!
//! Both transports deserialize into the request types below and serialize
//! whatever the engine returns, so identical requests produce identical JSON
//! no matter which transport carried them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{bm25_retrieve, Collection};
use crate::explainer::{
    explain_document, explain_intent, explain_pair, ConverterKind, ExplainError, Explanation,
    ExplanationParams, IntentExplanation, DEFAULT_N_SAMPLES, DEFAULT_N_WORDS,
};
use crate::rankers::{rank_documents, EmbeddingTable, Query, RankedList, RankerError, RankerSet};

pub const SNIPPET_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    pub ranker: String,
    pub converter: ConverterKind,
    pub k: usize,
    pub n_samples: usize,
    pub n_words: usize,
    pub pool_size: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            ranker: "bm25".into(),
            converter: ConverterKind::TopKBinary,
            k: 10,
            n_samples: DEFAULT_N_SAMPLES,
            n_words: DEFAULT_N_WORDS,
            pool_size: 100,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown doc_id \"{0}\"")]
    UnknownDoc(String),
    #[error("no documents match the query")]
    NoResults,
    #[error("document \"{doc_id}\" is not in the top {k} results for this query and ranker")]
    NotInTopK { doc_id: String, k: usize },
    #[error("\"{doc_a}\" (rank {rank_a}) is not ranked above \"{doc_b}\" (rank {rank_b})")]
    PairOrder {
        doc_a: String,
        rank_a: usize,
        doc_b: String,
        rank_b: usize,
    },
    #[error("{0}")]
    Unprocessable(ExplainError),
}

impl EngineError {
    /// HTTP status for the service transport.
    pub fn status(&self) -> u16 {
        match self {
            EngineError::BadRequest(_) => 400,
            EngineError::UnknownDoc(_) | EngineError::NoResults => 404,
            EngineError::NotInTopK { .. } | EngineError::PairOrder { .. } => 409,
            EngineError::Unprocessable(_) => 422,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::BadRequest(_) => "bad_request",
            EngineError::UnknownDoc(_) => "unknown_document",
            EngineError::NoResults => "no_results",
            EngineError::NotInTopK { .. } => "not_in_top_k",
            EngineError::PairOrder { .. } => "pair_order",
            EngineError::Unprocessable(ExplainError::Degenerate { .. })
            | EngineError::Unprocessable(ExplainError::AllDegenerate) => "degenerate_region",
            EngineError::Unprocessable(_) => "unprocessable",
        }
    }
}

impl From<RankerError> for EngineError {
    fn from(e: RankerError) -> Self {
        EngineError::BadRequest(e.to_string())
    }
}

impl From<ExplainError> for EngineError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::InvalidParams(_) | ExplainError::EmptyQuery => {
                EngineError::BadRequest(e.to_string())
            }
            other => EngineError::Unprocessable(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct SearchRequest {
    pub q: String,
    pub ranker: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub rank: usize,
    pub doc_id: String,
    pub title: String,
    pub snippet: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub ranker: String,
    pub k: usize,
    pub results: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct ExplainRequest {
    pub q: String,
    pub doc_id: String,
    pub ranker: Option<String>,
    pub converter: Option<String>,
    pub k: Option<usize>,
    pub n_words: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct ExplainPairRequest {
    pub q: String,
    pub doc_a_id: String,
    pub doc_b_id: String,
    pub ranker: Option<String>,
    pub converter: Option<String>,
    pub k: Option<usize>,
    pub n_words: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct IntentRequest {
    pub q: String,
    pub ranker: Option<String>,
    pub converter: Option<String>,
    pub k: Option<usize>,
    pub n_words: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusInfo {
    pub doc_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub rankers: Vec<String>,
    pub converters: Vec<String>,
    pub corpus: CorpusInfo,
    pub defaults: Defaults,
}

/// A fresh seed for requests that did not supply one. Kept below 2^32 so
/// it survives a round trip through JavaScript numbers.
pub fn generate_seed() -> u64 {
    u64::from(rand::random::<u32>())
}

pub struct Engine {
    collection: Collection,
    embeddings: Option<EmbeddingTable>,
    defaults: Defaults,
}

impl Engine {
    pub fn new(collection: Collection, embeddings: Option<EmbeddingTable>, defaults: Defaults) -> Self {
        Self {
            collection,
            embeddings,
            defaults,
        }
    }

    pub fn collection(&self) -> &Collection {
        &self.collection
    }

    pub fn defaults(&self) -> &Defaults {
        &self.defaults
    }

    pub fn rankers(&self) -> RankerSet<'_> {
        RankerSet::new(self.collection.index(), self.embeddings.as_ref())
    }

    pub fn meta(&self) -> Meta {
        Meta {
            rankers: self.rankers().available().iter().map(|k| k.to_string()).collect(),
            converters: ConverterKind::ALL.iter().map(|c| c.to_string()).collect(),
            corpus: CorpusInfo {
                doc_count: self.collection.len(),
            },
            defaults: self.defaults.clone(),
        }
    }

    fn query(&self, q: &str) -> Result<Query, EngineError> {
        let query = Query::new(q);
        if query.is_empty() {
            return Err(EngineError::BadRequest("query has no terms after tokenization".into()));
        }
        Ok(query)
    }

    fn depth(&self, k: Option<usize>) -> Result<usize, EngineError> {
        match k.unwrap_or(self.defaults.k) {
            0 => Err(EngineError::BadRequest("k must be at least 1".into())),
            k => Ok(k),
        }
    }

    fn converter(&self, name: Option<&str>) -> Result<ConverterKind, EngineError> {
        name.map_or(Ok(self.defaults.converter), |n| {
            n.parse().map_err(|e: crate::explainer::ConverterError| EngineError::BadRequest(e.to_string()))
        })
    }

    fn ranker_name<'r>(&'r self, name: &'r Option<String>) -> &'r str {
        name.as_deref().unwrap_or(&self.defaults.ranker)
    }

    /// BM25 candidate pool, re-scored by `ranker` and cut at `k`.
    pub fn ranked_list(&self, query: &Query, ranker: &str, k: usize) -> Result<RankedList, EngineError> {
        let rankers = self.rankers();
        let scorer = rankers.get(ranker)?;
        let pool = bm25_retrieve(self.collection.index(), query, self.defaults.pool_size)
            .map_err(|e| EngineError::BadRequest(e.to_string()))?;
        let candidates = pool.entries().iter().map(|entry| {
            let doc = self
                .collection
                .tokenized(&entry.doc_id)
                .expect("pool documents come from the collection");
            (entry.doc_id.clone(), scorer.score(query, &doc))
        });
        rank_documents(query.clone(), candidates.collect::<Vec<_>>(), k)
            .map_err(|e| EngineError::Unprocessable(e.into()))
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, EngineError> {
        let query = self.query(&req.q)?;
        let k = self.depth(req.k)?;
        let ranker = self.ranker_name(&req.ranker);
        let list = self.ranked_list(&query, ranker, k)?;
        let results = list
            .entries()
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let doc = self.collection.get(&entry.doc_id).expect("ranked documents exist");
                SearchHit {
                    rank: i + 1,
                    doc_id: entry.doc_id.clone(),
                    title: doc.title.clone(),
                    snippet: doc.snippet(SNIPPET_CHARS),
                    score: entry.score,
                }
            })
            .collect();
        Ok(SearchResponse {
            query: query.raw,
            ranker: ranker.to_owned(),
            k,
            results,
        })
    }

    /// Distinct body terms of a document, the upper bound for `n_words`.
    pub fn vocabulary_size(&self, doc_id: &str) -> Option<usize> {
        self.collection
            .explain_target(doc_id)
            .map(|t| t.doc().vocabulary.len())
    }

    fn params(
        &self,
        converter: ConverterKind,
        n_words: Option<usize>,
        vocabulary: usize,
        n_samples: Option<usize>,
        seed: Option<u64>,
    ) -> ExplanationParams {
        ExplanationParams {
            n_samples: n_samples.unwrap_or(self.defaults.n_samples),
            // an explicit n_words is validated downstream; the default adapts
            n_words: n_words.unwrap_or_else(|| self.defaults.n_words.min(vocabulary.max(1))),
            converter,
            seed: seed.unwrap_or_else(generate_seed),
            ..ExplanationParams::default()
        }
    }

    fn require_doc(&self, doc_id: &str) -> Result<(), EngineError> {
        match self.collection.get(doc_id) {
            Some(_) => Ok(()),
            None => Err(EngineError::UnknownDoc(doc_id.to_owned())),
        }
    }

    pub fn explain(&self, req: &ExplainRequest) -> Result<Explanation, EngineError> {
        let query = self.query(&req.q)?;
        let k = self.depth(req.k)?;
        let converter = self.converter(req.converter.as_deref())?;
        self.require_doc(&req.doc_id)?;
        let ranker_name = self.ranker_name(&req.ranker);
        let list = self.ranked_list(&query, ranker_name, k)?;
        if !list.contains(&req.doc_id) {
            return Err(EngineError::NotInTopK {
                doc_id: req.doc_id.clone(),
                k,
            });
        }
        let target = self.collection.explain_target(&req.doc_id).expect("doc exists");
        let params = self.params(
            converter,
            req.n_words,
            target.doc().vocabulary.len(),
            req.n_samples,
            req.seed,
        );
        let rankers = self.rankers();
        let ranker = rankers.get(ranker_name)?;
        Ok(explain_document(ranker.as_ref(), &query, &target, &list, &params)?)
    }

    pub fn explain_pair(&self, req: &ExplainPairRequest) -> Result<Explanation, EngineError> {
        let query = self.query(&req.q)?;
        let k = self.depth(req.k)?;
        let converter = self.converter(req.converter.as_deref())?;
        self.require_doc(&req.doc_a_id)?;
        self.require_doc(&req.doc_b_id)?;
        let ranker_name = self.ranker_name(&req.ranker);
        let list = self.ranked_list(&query, ranker_name, k)?;
        let rank_of = |id: &str| {
            list.rank_of(id).ok_or_else(|| EngineError::NotInTopK {
                doc_id: id.to_owned(),
                k,
            })
        };
        let rank_a = rank_of(&req.doc_a_id)?;
        let rank_b = rank_of(&req.doc_b_id)?;
        if rank_a >= rank_b {
            return Err(EngineError::PairOrder {
                doc_a: req.doc_a_id.clone(),
                rank_a,
                doc_b: req.doc_b_id.clone(),
                rank_b,
            });
        }
        let target = self.collection.explain_target(&req.doc_a_id).expect("doc exists");
        let params = self.params(
            converter,
            req.n_words,
            target.doc().vocabulary.len(),
            req.n_samples,
            req.seed,
        );
        let rankers = self.rankers();
        let ranker = rankers.get(ranker_name)?;
        Ok(explain_pair(ranker.as_ref(), &query, &target, rank_b, &list, &params)?)
    }

    pub fn intent(&self, req: &IntentRequest) -> Result<IntentExplanation, EngineError> {
        let query = self.query(&req.q)?;
        let k = self.depth(req.k)?;
        let converter = self.converter(req.converter.as_deref())?;
        let ranker_name = self.ranker_name(&req.ranker);
        let list = self.ranked_list(&query, ranker_name, k)?;
        if list.is_empty() {
            return Err(EngineError::NoResults);
        }
        let targets: Vec<_> = list
            .entries()
            .iter()
            .map(|e| self.collection.explain_target(&e.doc_id).expect("ranked documents exist"))
            .collect();
        let params = ExplanationParams {
            n_samples: req.n_samples.unwrap_or(self.defaults.n_samples),
            n_words: req.n_words.unwrap_or(self.defaults.n_words),
            converter,
            seed: req.seed.unwrap_or_else(generate_seed),
            ..ExplanationParams::default()
        };
        let rankers = self.rankers();
        let ranker = rankers.get(ranker_name)?;
        Ok(explain_intent(ranker.as_ref(), &query, &list, &targets, &params)?)
    }
}
