//! Index the bundled corpus, save it, and run a BM25 search.
//!
//! cargo run --example search -- "rail strikes"

use explainable_search::corpus::Collection;
use explainable_search::engine::{Defaults, Engine, SearchRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = std::env::args().nth(1).unwrap_or_else(|| "rail strikes".into());
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.jsonl");

    let collection = Collection::from_corpus_file(corpus)?;
    let path = std::env::temp_dir().join("xsearch-example.idx");
    collection.save(&path)?;
    println!(
        "indexed {} documents into {}",
        collection.len(),
        path.display()
    );

    let engine = Engine::new(Collection::load(&path)?, None, Defaults::default());
    let response = engine.search(&SearchRequest {
        q,
        ranker: None,
        k: Some(5),
    })?;
    for hit in response.results {
        println!("{:>2}. {:<10} {:>7.3}  {}", hit.rank, hit.doc_id, hit.score, hit.title);
    }
    Ok(())
}
