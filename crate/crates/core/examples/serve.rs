//! Serve the bundled corpus over HTTP.
//!
//! cargo run --example serve
//! curl 'http://127.0.0.1:8080/search?q=rail+strikes&k=3'
//! curl -X POST http://127.0.0.1:8080/explain \
//!      -H 'content-type: application/json' \
//!      -d '{"q": "rail strikes", "doc_id": "news-001", "seed": 1}'

use explainable_search::service::{serve, ServiceConfig};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = env!("CARGO_MANIFEST_DIR");
    let mut config = ServiceConfig::new(format!("{dir}/data/corpus.jsonl"));
    config.embedding_path = Some(format!("{dir}/data/embeddings.txt").into());
    serve(config).await?;
    Ok(())
}
