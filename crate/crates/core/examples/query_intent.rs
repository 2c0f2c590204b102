//! What does BM25 take a query to be about? Sums the explanations of the
//! top five documents.
//!
//! cargo run --example query_intent -- "union pay talks"

use explainable_search::corpus::{bm25_retrieve, Collection};
use explainable_search::explainer::{explain_intent, ExplanationParams};
use explainable_search::rankers::{Bm25Ranker, Query};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = std::env::args().nth(1).unwrap_or_else(|| "union pay talks".into());
    let collection = Collection::from_corpus_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.jsonl"))?;
    let query = Query::new(q);
    let list = bm25_retrieve(collection.index(), &query, 5)?;
    let targets: Vec<_> = list
        .entries()
        .iter()
        .filter_map(|e| collection.explain_target(&e.doc_id))
        .collect();

    let params = ExplanationParams::default().with_seed(11);
    let intent = explain_intent(&Bm25Ranker::new(collection.index()), &query, &list, &targets, &params)?;
    println!("\"{}\" over {} documents:", intent.query, intent.docs_aggregated);
    for entry in intent.entries {
        println!("  {:<12} {:+.4}", entry.term, entry.weight);
    }
    Ok(())
}
