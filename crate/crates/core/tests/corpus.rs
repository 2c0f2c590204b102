mod common;

use std::collections::HashMap;
use std::fs;

use explainable_search::corpus::{bm25_retrieve, tokenize, Collection, CorpusError, Document};
use explainable_search::rankers::{load_embeddings, EmbeddingError, Query};

use common::data_path;

#[test]
fn bundled_corpus_loads() {
    let collection = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap();
    assert_eq!(collection.len(), 12);
    assert!(collection.get("news-001").is_some());
    assert!(collection.get("news-999").is_none());
}

#[test]
fn index_build_is_deterministic() {
    let a = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap();
    let b = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());

    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("a.idx"), dir.path().join("b.idx"));
    a.save(&first).unwrap();
    b.save(&second).unwrap();
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn index_round_trip() {
    let built = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.idx");
    built.save(&path).unwrap();

    let loaded = Collection::load(&path).unwrap();
    assert_eq!(loaded.to_bytes(), built.to_bytes());
    assert_eq!(loaded.get("news-003"), built.get("news-003"));

    let opened = Collection::open(&path).unwrap();
    let from_jsonl = Collection::open(data_path("corpus.jsonl")).unwrap();
    assert_eq!(opened.to_bytes(), from_jsonl.to_bytes());
}

#[test]
fn rejects_unknown_index_version() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("future.idx");
    let mut bytes = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap().to_bytes();
    bytes[0] = 9;
    fs::write(&path, bytes).unwrap();
    assert!(matches!(Collection::load(&path), Err(CorpusError::IndexVersion { found: 9, .. })));
}

#[test]
fn malformed_record_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(
        &path,
        "{\"doc_id\": \"a\", \"title\": \"t\", \"body\": \"b\"}\n\n{\"doc_id\": \"b\", \"title\": 3}\n",
    )
    .unwrap();
    match Collection::from_corpus_file(&path) {
        Err(CorpusError::Record { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a record error, got {other:?}"),
    }
}

#[test]
fn missing_corpus_is_io_error() {
    let err = Collection::from_corpus_file("/nonexistent/corpus.jsonl").unwrap_err();
    assert!(matches!(err, CorpusError::Io { .. }));
}

#[test]
fn duplicate_ids_rejected() {
    let docs = vec![Document::new("x", "a", "b"), Document::new("x", "c", "d")];
    assert!(matches!(Collection::build(docs), Err(CorpusError::DuplicateDocId(id)) if id == "x"));
}

/// BM25 recomputed from raw term counts over the documents themselves.
fn bm25_by_hand(docs: &[Document], query: &[String]) -> HashMap<String, f64> {
    let token_lists: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            let mut tokens = tokenize(&d.title);
            tokens.extend(tokenize(&d.body));
            tokens
        })
        .collect();
    let n = docs.len() as f64;
    let avg = token_lists.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut unique = query.to_vec();
    unique.dedup();
    docs.iter()
        .zip(&token_lists)
        .map(|(doc, tokens)| {
            let len = tokens.len() as f64;
            let score = unique
                .iter()
                .map(|term| {
                    let df = token_lists.iter().filter(|t| t.contains(term)).count() as f64;
                    let tf = tokens.iter().filter(|t| *t == term).count() as f64;
                    let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                    idf * tf * 2.2 / (tf + 1.2 * (1.0 - 0.75 + 0.75 * len / avg))
                })
                .sum();
            (doc.doc_id.clone(), score)
        })
        .collect()
}

#[test]
fn bm25_matches_hand_computation() {
    let collection = Collection::from_corpus_file(data_path("corpus.jsonl")).unwrap();
    for q in ["rail strikes", "union pay talks", "jaguar", "heat wave weekend"] {
        let query = Query::new(q);
        let expected = bm25_by_hand(collection.documents(), &query.terms);
        let list = bm25_retrieve(collection.index(), &query, 100).unwrap();
        assert!(!list.is_empty(), "{q}");
        for entry in list.entries() {
            let want = expected[&entry.doc_id];
            assert!((entry.score - want).abs() < 1e-12, "{q} {}: {} vs {want}", entry.doc_id, entry.score);
        }
        let matching = expected.values().filter(|&&s| s > 0.0).count();
        assert_eq!(list.len(), matching, "{q}");
    }
}

fn glove_fixture() -> String {
    ["rail", "strike", "union", "cat", "dog"]
        .iter()
        .enumerate()
        .map(|(w, word)| {
            let values: Vec<String> = (0..50).map(|j| format!("{:.4}", ((w * 50 + j) as f64 * 0.37).sin())).collect();
            format!("{word} {}", values.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn loads_glove_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("glove.txt");
    fs::write(&path, glove_fixture()).unwrap();
    let table = load_embeddings(&path).unwrap();
    assert_eq!(table.len(), 5);
    assert_eq!(table.dimension(), 50);
    assert_eq!(table.get("union").unwrap().len(), 50);
    assert!(table.get("horse").is_none());
}

#[test]
fn ragged_embedding_row_rejected() {
    let mut text = glove_fixture();
    text.push_str("\nhorse 0.1 0.2");
    match explainable_search::rankers::EmbeddingTable::from_text(&text) {
        Err(EmbeddingError::Dimension { line, expected, found }) => {
            assert_eq!((line, expected, found), (6, 50, 2));
        }
        other => panic!("expected a dimension error, got {other:?}"),
    }
}

#[test]
fn bundled_embeddings_cover_corpus_topics() {
    let table = load_embeddings(data_path("embeddings.txt")).unwrap();
    for word in ["rail", "strikes", "union", "jaguar", "election"] {
        assert!(table.get(word).is_some(), "{word}");
    }
}
