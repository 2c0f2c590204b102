//! Re-rank BM25 candidates with the bundled word vectors and explain the top
//! hit. Any GloVe-format file works in place of the bundled one.
//!
//! cargo run --example embedding_ranker -- "rail strikes"

use explainable_search::corpus::Collection;
use explainable_search::engine::{Defaults, Engine, ExplainRequest, SearchRequest};
use explainable_search::rankers::load_embeddings;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = std::env::args().nth(1).unwrap_or_else(|| "rail strikes".into());
    let dir = env!("CARGO_MANIFEST_DIR");
    let collection = Collection::from_corpus_file(format!("{dir}/data/corpus.jsonl"))?;
    let embeddings = load_embeddings(format!("{dir}/data/embeddings.txt"))?;
    let engine = Engine::new(collection, Some(embeddings), Defaults::default());

    let results = engine.search(&SearchRequest {
        q: q.clone(),
        ranker: Some("embed".into()),
        k: Some(5),
    })?;
    for hit in &results.results {
        println!("{:>2}. {:<10} {:.4}  {}", hit.rank, hit.doc_id, hit.score, hit.title);
    }

    let Some(top) = results.results.first() else {
        return Ok(());
    };
    let explanation = engine.explain(&ExplainRequest {
        q,
        doc_id: top.doc_id.clone(),
        ranker: Some("embed".into()),
        converter: Some("score".into()),
        k: Some(5),
        n_words: Some(6),
        n_samples: None,
        seed: Some(1),
    })?;
    println!("{}", serde_json::to_string_pretty(&explanation)?);
    Ok(())
}
