//! Explainable search: rank documents with pluggable pointwise rankers and
//! explain the rankings with local, model-agnostic surrogate models.
//!
//! Three questions can be asked of any ranker:
//!
//! * why is this document relevant to the query
//!   ([`explainer::explain_document`]),
//! * why is this document ranked above that one ([`explainer::explain_pair`]),
//! * what intent did the ranker infer from the query
//!   ([`explainer::explain_intent`]).
//!
//! The explainer only ever calls [`rankers::Ranker::score_tokens`], so any
//! deterministic scorer can be explained. [`engine::Engine`] wires a corpus,
//! the built-in rankers and the explainer together behind request types that
//! the HTTP [`service`] and the [`cli`] share.
//!
//! ```
//! use explainable_search::corpus::TokenizedDocument;
//! use explainable_search::explainer::{explain_document, ExplanationParams};
//! use explainable_search::rankers::{rank_documents, Query, QueryTermCount};
//!
//! let query = Query::new("rail strikes");
//! let doc = TokenizedDocument::from_text("d1", "rail workers began strikes on monday");
//! let list = rank_documents(
//!     query.clone(),
//!     vec![("d1".to_string(), 2.0), ("d2".to_string(), 1.0), ("d3".to_string(), 0.0)],
//!     3,
//! )
//! .unwrap();
//! let params = ExplanationParams::default().with_n_samples(500).with_n_words(3).with_seed(7);
//! let explanation = explain_document(&QueryTermCount, &query, &doc.into(), &list, &params).unwrap();
//! assert!(explanation.entries.iter().take(2).all(|e| e.weight > 0.0));
//! ```

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod explainer;
pub mod rankers;
pub mod service;
