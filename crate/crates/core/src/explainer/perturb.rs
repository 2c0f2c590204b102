use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ExplainError;
use crate::corpus::TokenizedDocument;

/// A word-removal variant of a document.
///
/// `presence` is indexed like [`TokenizedDocument::features`]. Score, label
/// and weight are filled in by the explanation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSample {
    pub presence: Vec<bool>,
    pub kept_tokens: Vec<String>,
    pub score: Option<f64>,
    pub label: Option<f64>,
    pub weight: Option<f64>,
}

impl PerturbedSample {
    /// Sample over `doc` keeping exactly the terms flagged in `presence`.
    pub fn from_presence(doc: &TokenizedDocument, presence: Vec<bool>) -> Self {
        let feature_of: HashMap<&str, usize> = doc
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let kept_tokens = doc
            .tokens
            .iter()
            .filter(|t| presence[feature_of[t.as_str()]])
            .cloned()
            .collect();
        Self {
            presence,
            kept_tokens,
            score: None,
            label: None,
            weight: None,
        }
    }

    pub fn kept_terms(&self) -> usize {
        self.presence.iter().filter(|&&p| p).count()
    }

    pub fn dropped_terms(&self) -> usize {
        self.presence.len() - self.kept_terms()
    }
}

/// Draws `n_samples` perturbations of `doc`.
///
/// Each sample draws a removal count uniformly from 1..=m-1 (m = vocabulary
/// size), picks that many distinct terms uniformly, and removes every
/// occurrence of them. The original document is never among the samples.
pub fn perturb(
    doc: &TokenizedDocument,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PerturbedSample>, ExplainError> {
    let m = doc.vocabulary.len();
    if m < 2 {
        return Err(ExplainError::TooFewTerms {
            doc_id: doc.doc_id.clone(),
            vocabulary: m,
        });
    }
    let feature_of: HashMap<&str, usize> = doc
        .vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let token_features: Vec<usize> = doc.tokens.iter().map(|t| feature_of[t.as_str()]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_samples)
        .map(|_| {
            let n_drop = rng.gen_range(1..m);
            let mut presence = vec![true; m];
            for feature in index::sample(&mut rng, m, n_drop) {
                presence[feature] = false;
            }
            let kept_tokens = doc
                .tokens
                .iter()
                .zip(&token_features)
                .filter(|(_, &f)| presence[f])
                .map(|(t, _)| t.clone())
                .collect();
            PerturbedSample {
                presence,
                kept_tokens,
                score: None,
                label: None,
                weight: None,
            }
        })
        .collect();
    Ok(samples)
}
