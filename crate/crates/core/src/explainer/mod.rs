//! Local model-agnostic explanations for pointwise rankers.
//!
//! The pipeline for one document:
//!
//! 1. [`perturb`] the document by removing random subsets of its terms,
//! 2. score every variant with the blackbox ranker,
//! 3. turn each score into P(relevant) with a [`LabelRule`] anchored on the
//!    ranked list (top score d_1, threshold score d_k, or the full top-k),
//! 4. weight each variant by its [`locality_weight`] to the original,
//! 5. fit a weighted ridge surrogate ([`fit_local_model`]) over term presence.
//!
//! The surrogate's coefficients answer "why is this document relevant";
//! lowering k to the rank of a second document answers "why is A above B"
//! ([`explain_pair`]), and summing coefficients over the whole top-k answers
//! "what does the ranker think this query is about" ([`explain_intent`]).

mod converter;
mod fit;
mod perturb;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use converter::{
    prob_rank_based, prob_score_based, prob_topk_binary, ConverterError, ConverterKind, LabelRule,
};
pub use fit::{
    fit_local_model, fit_weighted_ridge, locality_weight, ExplanationModel, RidgeFit,
    DEFAULT_KERNEL_WIDTH,
};
pub use perturb::{perturb, PerturbedSample};

use crate::corpus::TokenizedDocument;
use crate::rankers::{Query, RankedList, Ranker, RankingError};

/// Perturbed samples per explanation.
pub const DEFAULT_N_SAMPLES: usize = 2000;
pub const DEFAULT_N_WORDS: usize = 10;
pub const DEFAULT_REGULARIZATION: f64 = 1.0;
pub const MIN_N_SAMPLES: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ExplainError {
    #[error("document \"{doc_id}\" has {vocabulary} distinct term(s); at least 2 are needed to perturb it")]
    TooFewTerms { doc_id: String, vocabulary: usize },
    #[error("invalid explanation parameters: {0}")]
    InvalidParams(String),
    #[error("query has no terms after tokenization")]
    EmptyQuery,
    #[error(
        "the local region is flat: every perturbed document received probability {label} \
         ({}), so there is nothing for a linear model to fit",
        if *label >= 0.5 { "all relevant" } else { "all irrelevant" }
    )]
    Degenerate { label: f64 },
    #[error("converter \"{converter}\": {source}")]
    Converter {
        converter: ConverterKind,
        #[source]
        source: ConverterError,
    },
    #[error("ranker returned a non-finite score ({0}) for a perturbed document")]
    NonFiniteScore(f64),
    #[error("need at least 2 samples to fit, got {0}")]
    TooFewSamples(usize),
    #[error("every sample needs a label and a weight before fitting")]
    UnlabelledSample,
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("document \"{0}\" is not in the ranked list")]
    NotRanked(String),
    #[error("rank {rank} is outside the ranked list of length {len}")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("document \"{doc_a}\" is at rank {rank_a}, which is not above rank {rank_b}")]
    PairOrder {
        doc_a: String,
        rank_a: usize,
        rank_b: usize,
    },
    #[error("the ranked list is empty")]
    EmptyRankedList,
    #[error("no explanation target supplied for ranked document \"{0}\"")]
    MissingTarget(String),
    #[error("every document in the ranked list has a flat local region; no intent can be inferred")]
    AllDegenerate,
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

impl ExplainError {
    /// True for the "nothing to explain here" outcomes that intent
    /// aggregation skips over.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, ExplainError::Degenerate { .. } | ExplainError::TooFewTerms { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationParams {
    pub n_samples: usize,
    pub n_words: usize,
    pub converter: ConverterKind,
    pub kernel_width: f64,
    pub regularization: f64,
    pub seed: u64,
}

impl Default for ExplanationParams {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_N_SAMPLES,
            n_words: DEFAULT_N_WORDS,
            converter: ConverterKind::TopKBinary,
            kernel_width: DEFAULT_KERNEL_WIDTH,
            regularization: DEFAULT_REGULARIZATION,
            seed: 0,
        }
    }
}

impl ExplanationParams {
    pub fn with_converter(mut self, converter: ConverterKind) -> Self {
        self.converter = converter;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_words(mut self, n_words: usize) -> Self {
        self.n_words = n_words;
        self
    }

    pub fn with_n_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    /// Checks everything except the upper bound on `n_words`, which depends
    /// on the document.
    pub fn validate(&self) -> Result<(), ExplainError> {
        let problem = if self.n_samples < MIN_N_SAMPLES {
            format!("n_samples must be at least {MIN_N_SAMPLES}, got {}", self.n_samples)
        } else if self.n_words == 0 {
            "n_words must be at least 1".to_owned()
        } else if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
            format!("kernel_width must be positive, got {}", self.kernel_width)
        } else if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            format!("regularization must be positive, got {}", self.regularization)
        } else {
            return Ok(());
        };
        Err(ExplainError::InvalidParams(problem))
    }

    fn validate_for(&self, vocabulary: usize) -> Result<(), ExplainError> {
        self.validate()?;
        if self.n_words > vocabulary {
            return Err(ExplainError::InvalidParams(format!(
                "n_words ({}) exceeds the document's {vocabulary} distinct terms",
                self.n_words
            )));
        }
        Ok(())
    }
}

/// What gets perturbed and scored: a fixed token prefix (e.g. the title)
/// that is always kept, followed by the perturbable document.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainTarget {
    prefix: Vec<String>,
    doc: TokenizedDocument,
}

impl ExplainTarget {
    pub fn new(doc: TokenizedDocument) -> Self {
        Self {
            prefix: Vec::new(),
            doc,
        }
    }

    pub fn with_prefix(prefix: Vec<String>, doc: TokenizedDocument) -> Self {
        Self { prefix, doc }
    }

    pub fn prefix(&self) -> &[String] {
        &self.prefix
    }

    pub fn doc(&self) -> &TokenizedDocument {
        &self.doc
    }

    pub fn doc_id(&self) -> &str {
        &self.doc.doc_id
    }

    /// The token sequence the ranker sees for a given variant of the body.
    fn scored_tokens<'t>(&self, body: &'t [String]) -> std::borrow::Cow<'t, [String]> {
        if self.prefix.is_empty() {
            std::borrow::Cow::Borrowed(body)
        } else {
            let mut tokens = self.prefix.clone();
            tokens.extend_from_slice(body);
            std::borrow::Cow::Owned(tokens)
        }
    }
}

impl From<TokenizedDocument> for ExplainTarget {
    fn from(doc: TokenizedDocument) -> Self {
        Self::new(doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RelevanceClass {
    Relevant,
    Irrelevant,
}

impl RelevanceClass {
    pub fn of(weight: f64) -> Self {
        if weight > 0.0 {
            RelevanceClass::Relevant
        } else {
            RelevanceClass::Irrelevant
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationEntry {
    pub term: String,
    pub weight: f64,
    pub class: RelevanceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub doc_id: String,
    pub query: String,
    pub converter: ConverterKind,
    pub seed: u64,
    pub fit_r2: f64,
    pub entries: Vec<ExplanationEntry>,
}

impl Explanation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("explanation serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentExplanation {
    pub query: String,
    pub converter: ConverterKind,
    pub seed: u64,
    pub docs_aggregated: usize,
    pub entries: Vec<ExplanationEntry>,
}

impl IntentExplanation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("intent explanation serializes")
    }
}

/// The `n` largest-magnitude weights, ties broken by term.
fn top_entries<'a>(weights: impl IntoIterator<Item = (&'a String, &'a f64)>, n: usize) -> Vec<ExplanationEntry> {
    let mut entries: Vec<ExplanationEntry> = weights
        .into_iter()
        .map(|(term, &weight)| ExplanationEntry {
            term: term.clone(),
            weight,
            class: RelevanceClass::of(weight),
        })
        .collect();
    entries.sort_by(entry_order);
    entries.truncate(n);
    entries
}

fn converter_error(kind: ConverterKind) -> impl Fn(ConverterError) -> ExplainError {
    move |source| ExplainError::Converter {
        converter: kind,
        source,
    }
}

/// Steps 1–4 of the pipeline: perturbed samples with score, label and
/// locality weight filled in.
pub fn label_samples(
    ranker: &dyn Ranker,
    query: &Query,
    target: &ExplainTarget,
    rule: &LabelRule,
    params: &ExplanationParams,
) -> Result<Vec<PerturbedSample>, ExplainError> {
    if query.is_empty() {
        return Err(ExplainError::EmptyQuery);
    }
    let mut samples = perturb(target.doc(), params.n_samples, params.seed)?;

    // indexed collect keeps sample order identical to a sequential run
    let scores: Vec<f64> = samples
        .par_iter()
        .map(|s| ranker.score_tokens(query, &target.scored_tokens(&s.kept_tokens)))
        .collect();

    let to_err = converter_error(rule.kind());
    for (sample, score) in samples.iter_mut().zip(scores) {
        if !score.is_finite() {
            return Err(ExplainError::NonFiniteScore(score));
        }
        sample.score = Some(score);
        sample.label = Some(rule.label(score).map_err(&to_err)?);
        sample.weight = Some(locality_weight(&sample.presence, params.kernel_width));
    }
    Ok(samples)
}

/// Runs the whole pipeline and returns the full (untruncated) surrogate.
pub fn fit_explanation_model(
    ranker: &dyn Ranker,
    query: &Query,
    target: &ExplainTarget,
    rule: &LabelRule,
    params: &ExplanationParams,
) -> Result<ExplanationModel, ExplainError> {
    let samples = label_samples(ranker, query, target, rule, params)?;
    fit_local_model(&target.doc().features(), &samples, params.regularization)
}

/// "Why is this document relevant to the query?"
pub fn explain_document(
    ranker: &dyn Ranker,
    query: &Query,
    target: &ExplainTarget,
    ranked_list: &RankedList,
    params: &ExplanationParams,
) -> Result<Explanation, ExplainError> {
    params.validate_for(target.doc().vocabulary.len())?;
    let rule = LabelRule::from_ranked_list(params.converter, ranked_list)
        .map_err(converter_error(params.converter))?;
    let model = fit_explanation_model(ranker, query, target, &rule, params)?;
    Ok(Explanation {
        doc_id: target.doc_id().to_owned(),
        query: query.raw.clone(),
        converter: params.converter,
        seed: params.seed,
        fit_r2: model.local_fit_r2,
        entries: top_entries(&model.coefficients, params.n_words),
    })
}

/// "Why is A ranked above B?": the explanation of A with the list cut at B's
/// rank, so that B becomes the threshold document. Only the terms pushing A
/// toward relevance are kept.
pub fn explain_pair(
    ranker: &dyn Ranker,
    query: &Query,
    doc_a: &ExplainTarget,
    doc_b_rank: usize,
    ranked_list: &RankedList,
    params: &ExplanationParams,
) -> Result<Explanation, ExplainError> {
    let rank_a = ranked_list
        .rank_of(doc_a.doc_id())
        .ok_or_else(|| ExplainError::NotRanked(doc_a.doc_id().to_owned()))?;
    if doc_b_rank == 0 || doc_b_rank > ranked_list.len() {
        return Err(ExplainError::RankOutOfRange {
            rank: doc_b_rank,
            len: ranked_list.len(),
        });
    }
    if rank_a >= doc_b_rank {
        return Err(ExplainError::PairOrder {
            doc_a: doc_a.doc_id().to_owned(),
            rank_a,
            rank_b: doc_b_rank,
        });
    }
    let cut = ranked_list.truncated(doc_b_rank)?;
    let mut explanation = explain_document(ranker, query, doc_a, &cut, params)?;
    explanation.entries.retain(|e| e.weight > 0.0);
    Ok(explanation)
}

/// "What is the intent of the query according to the ranker?"
///
/// Fits a surrogate for every ranked document (one target per entry, in any
/// order) and sums the coefficients per term. Documents with a flat local
/// region are skipped. Documents are visited in doc_id order, so neither the
/// list order nor the order of `targets` affects the result.
pub fn explain_intent(
    ranker: &dyn Ranker,
    query: &Query,
    ranked_list: &RankedList,
    targets: &[ExplainTarget],
    params: &ExplanationParams,
) -> Result<IntentExplanation, ExplainError> {
    params.validate()?;
    if ranked_list.is_empty() {
        return Err(ExplainError::EmptyRankedList);
    }
    let rule = LabelRule::from_ranked_list(params.converter, ranked_list)
        .map_err(converter_error(params.converter))?;

    let mut doc_ids: Vec<&str> = ranked_list.entries().iter().map(|e| e.doc_id.as_str()).collect();
    doc_ids.sort_unstable();

    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    let mut aggregated = 0;
    for doc_id in doc_ids {
        let target = targets
            .iter()
            .find(|t| t.doc_id() == doc_id)
            .ok_or_else(|| ExplainError::MissingTarget(doc_id.to_owned()))?;
        match fit_explanation_model(ranker, query, target, &rule, params) {
            Ok(model) => {
                for (term, weight) in model.coefficients {
                    *totals.entry(term).or_insert(0.0) += weight;
                }
                aggregated += 1;
            }
            Err(e) if e.is_degenerate() => continue,
            Err(e) => return Err(e),
        }
    }
    if aggregated == 0 {
        return Err(ExplainError::AllDegenerate);
    }

    Ok(IntentExplanation {
        query: query.raw.clone(),
        converter: params.converter,
        seed: params.seed,
        docs_aggregated: aggregated,
        entries: top_entries(&totals, params.n_words),
    })
}

/// Descending |weight| order used for every entry list.
pub fn entry_order(a: &ExplanationEntry, b: &ExplanationEntry) -> Ordering {
    b.weight
        .abs()
        .total_cmp(&a.weight.abs())
        .then_with(|| a.term.cmp(&b.term))
}
