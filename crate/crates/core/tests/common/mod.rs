#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use explainable_search::corpus::TokenizedDocument;
use explainable_search::explainer::ExplainTarget;
use explainable_search::rankers::{rank_documents, Query, RankedList, Ranker};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Weighted ridge by brute force: forms the full (p+1)x(p+1) normal
/// equations entry by entry and solves them with Gaussian elimination and
/// partial pivoting. Returns (intercept, coefficients).
pub fn brute_force_ridge(
    rows: &[Vec<f64>],
    labels: &[f64],
    weights: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let p = rows[0].len();
    let dim = p + 1;
    let design = |i: usize, j: usize| if j == 0 { 1.0 } else { rows[i][j - 1] };

    let mut a = vec![vec![0.0; dim + 1]; dim];
    for r in 0..dim {
        for c in 0..dim {
            a[r][c] = (0..rows.len()).map(|i| weights[i] * design(i, r) * design(i, c)).sum();
            if r == c && r > 0 {
                a[r][c] += lambda;
            }
        }
        a[r][dim] = (0..rows.len()).map(|i| weights[i] * design(i, r) * labels[i]).sum();
    }

    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in col + 1..dim {
            let factor = a[r][col] / a[col][col];
            for c in col..=dim {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; dim];
    for r in (0..dim).rev() {
        let tail: f64 = (r + 1..dim).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][dim] - tail) / a[r][r];
    }
    (x[0], x[1..].to_vec())
}

/// Multiplies another ranker's scores by a constant.
pub struct Scaled<R>(pub R, pub f64);

impl<R: Ranker> Ranker for Scaled<R> {
    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64 {
        self.0.score_tokens(query, tokens) * self.1
    }
}

pub fn filler(i: usize) -> String {
    const WORDS: [&str; 12] = [
        "report", "city", "council", "monday", "officials", "said", "also", "for", "the",
        "week", "plans", "area",
    ];
    format!("{}{}", WORDS[i % WORDS.len()], i / WORDS.len())
}

/// A document with exactly `n_terms` distinct terms: the query terms plus
/// filler, with a few terms repeated so token count exceeds term count.
pub fn planted_document(doc_id: &str, query_terms: &[&str], n_terms: usize) -> TokenizedDocument {
    let mut tokens: Vec<String> = query_terms.iter().map(|t| t.to_string()).collect();
    let mut i = 0;
    while tokens.len() < n_terms {
        tokens.push(filler(i));
        i += 1;
    }
    for j in 0..n_terms / 5 {
        tokens.push(tokens[(j * 7) % n_terms].clone());
    }
    // spread the query terms through the text
    tokens.rotate_left(n_terms / 3);
    TokenizedDocument::from_tokens(doc_id, tokens)
}

/// Ten documents for "rail strikes": one 50-term document with both query
/// terms, three with one of them, six with neither.
pub fn planted_corpus() -> Vec<ExplainTarget> {
    let mut docs = vec![planted_document("d00", &["rail", "strikes"], 50)];
    for (i, terms) in [["rail"], ["strikes"], ["rail"]].iter().enumerate() {
        docs.push(planted_document(&format!("d{:02}", i + 1), terms, 30));
    }
    for i in 4..10 {
        docs.push(planted_document(&format!("d{i:02}"), &[], 30));
    }
    docs.into_iter().map(ExplainTarget::new).collect()
}

pub fn rank_targets(ranker: &dyn Ranker, query: &Query, targets: &[ExplainTarget], k: usize) -> RankedList {
    rank_documents(
        query.clone(),
        targets
            .iter()
            .map(|t| (t.doc_id().to_owned(), ranker.score_tokens(query, &t.doc().tokens))),
        k,
    )
    .unwrap()
}
