//! Any `Fn(&Query, &[String]) -> f64` is a ranker. Here a toy ranker that
//! rewards query terms near the start of the document is explained without
//! an index.

use explainable_search::corpus::TokenizedDocument;
use explainable_search::explainer::{explain_document, ExplainTarget, ExplanationParams};
use explainable_search::rankers::{rank_documents, Query, Ranker};

fn early_mentions(query: &Query, tokens: &[String]) -> f64 {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| query.terms.contains(t))
        .map(|(i, _)| 1.0 / (1.0 + i as f64))
        .sum()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = Query::new("tram line");
    let docs = [
        ("a", "the new tram line opens downtown with trams every six minutes"),
        ("b", "council approves budget and mentions a tram line study"),
        ("c", "heat wave expected this weekend across the region"),
    ];
    let targets: Vec<ExplainTarget> = docs
        .iter()
        .map(|(id, text)| TokenizedDocument::from_text(*id, text).into())
        .collect();
    let list = rank_documents(
        query.clone(),
        targets
            .iter()
            .map(|t| (t.doc_id().to_owned(), early_mentions.score(&query, t.doc()))),
        3,
    )?;

    let params = ExplanationParams::default().with_n_words(5).with_seed(2);
    let explanation = explain_document(&early_mentions, &query, &targets[0], &list, &params)?;
    println!("{}", explanation.to_json());
    Ok(())
}
