//! Why is the first result ranked above the fourth?
//!
//! cargo run --example explain_pair

use explainable_search::corpus::{bm25_retrieve, Collection};
use explainable_search::explainer::{explain_pair, ExplanationParams};
use explainable_search::rankers::{Bm25Ranker, Query};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let collection = Collection::from_corpus_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.jsonl"))?;
    let query = Query::new("rail strikes");
    let list = bm25_retrieve(collection.index(), &query, 10)?;
    let (a, b) = (&list.entries()[0], &list.entries()[3]);
    let target = collection.explain_target(&a.doc_id).expect("ranked documents exist");

    let params = ExplanationParams::default().with_seed(3);
    let explanation = explain_pair(&Bm25Ranker::new(collection.index()), &query, &target, 4, &list, &params)?;
    println!("{} (rank 1) is above {} (rank 4) because of:", a.doc_id, b.doc_id);
    for entry in explanation.entries {
        println!("  {:<12} {:+.4}", entry.term, entry.weight);
    }
    Ok(())
}
