//! Why is the top document relevant? Explains the first BM25 hit under each
//! of the three probability converters.
//!
//! cargo run --example explain_document -- "rail strikes"

use explainable_search::corpus::{bm25_retrieve, Collection};
use explainable_search::explainer::{explain_document, ConverterKind, ExplanationParams};
use explainable_search::rankers::{Bm25Ranker, Query};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = std::env::args().nth(1).unwrap_or_else(|| "rail strikes".into());
    let collection = Collection::from_corpus_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.jsonl"))?;
    let query = Query::new(q);
    let list = bm25_retrieve(collection.index(), &query, 10)?;
    let Some(top) = list.entries().first() else {
        println!("no document matches \"{}\"", query.raw);
        return Ok(());
    };
    let target = collection.explain_target(&top.doc_id).expect("ranked documents exist");
    let ranker = Bm25Ranker::new(collection.index());

    for converter in ConverterKind::ALL {
        let params = ExplanationParams::default()
            .with_converter(converter)
            .with_n_words(6)
            .with_seed(7);
        match explain_document(&ranker, &query, &target, &list, &params) {
            Ok(explanation) => {
                println!("{} ({converter}, fit r2 {:.2})", explanation.doc_id, explanation.fit_r2);
                for entry in &explanation.entries {
                    println!("  {:<12} {:+.4}", entry.term, entry.weight);
                }
            }
            Err(e) => println!("{converter}: {e}"),
        }
    }
    Ok(())
}
