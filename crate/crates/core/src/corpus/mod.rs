//! Document ingestion, tokenization, the inverted index, and BM25 candidate
//! retrieval.

mod index;
mod tokenize;

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::{bm25_retrieve, build_index, indexed_tokens, Index, Posting, BM25_B, BM25_K1};
pub use tokenize::{tokenize, TokenizedDocument};

use crate::explainer::ExplainTarget;

/// Leading byte of every index file.
pub const INDEX_FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid document record: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate doc_id \"{0}\"")]
    DuplicateDocId(String),
    #[error("document with empty doc_id")]
    EmptyDocId,
    #[error("document \"{0}\" has an empty body")]
    EmptyBody(String),
    #[error("{path}: unsupported index format version {found} (expected {INDEX_FORMAT_VERSION})")]
    IndexVersion { path: PathBuf, found: u8 },
    #[error("{path}: malformed index file: {message}")]
    IndexFormat { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub body: String,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            body: body.into(),
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.doc_id.is_empty() {
            return Err(CorpusError::EmptyDocId);
        }
        if self.body.trim().is_empty() {
            return Err(CorpusError::EmptyBody(self.doc_id.clone()));
        }
        Ok(())
    }

    /// The first `max_chars` characters of the body.
    pub fn snippet(&self, max_chars: usize) -> String {
        self.body.chars().take(max_chars).collect()
    }
}

/// Reads newline-delimited JSON documents. Blank lines are skipped and
/// unknown fields ignored.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut documents = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| CorpusError::Record {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        doc.validate().map_err(|e| CorpusError::Record {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        documents.push(doc);
    }
    Ok(documents)
}

/// Documents plus their index: everything a search or explanation request
/// needs, and the unit that is persisted to an index file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Collection {
    documents: Vec<Document>,
    index: Index,
    #[serde(skip)]
    by_id: HashMap<String, usize>,
}

impl Collection {
    pub fn build(documents: Vec<Document>) -> Result<Self, CorpusError> {
        for doc in &documents {
            doc.validate()?;
        }
        let index = build_index(&documents)?;
        Ok(Self::assemble(documents, index))
    }

    pub fn from_corpus_file(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::build(load_corpus(path)?)
    }

    /// Opens either an index file (recognized by its version byte) or a
    /// JSONL corpus, which is indexed on the fly.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let mut first = [0u8; 1];
        let read = fs::File::open(path)
            .and_then(|mut f| std::io::Read::read(&mut f, &mut first))
            .map_err(|source| CorpusError::Io {
                path: path.to_owned(),
                source,
            })?;
        if read == 1 && first[0] == INDEX_FORMAT_VERSION {
            Self::load(path)
        } else {
            Self::from_corpus_file(path)
        }
    }

    fn assemble(documents: Vec<Document>, index: Index) -> Self {
        let by_id = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i))
            .collect();
        Self {
            documents,
            index,
            by_id,
        }
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.documents[i])
    }

    /// Title+body tokens, the form every ranker scores.
    pub fn tokenized(&self, doc_id: &str) -> Option<TokenizedDocument> {
        self.get(doc_id)
            .map(|d| TokenizedDocument::from_tokens(d.doc_id.clone(), indexed_tokens(d)))
    }

    /// Explanation target: the same title+body tokens the rankers score, so
    /// the unperturbed target reproduces its ranked-list score exactly.
    pub fn explain_target(&self, doc_id: &str) -> Option<ExplainTarget> {
        self.tokenized(doc_id).map(ExplainTarget::new)
    }

    /// Canonical serialized form: the version byte followed by JSON.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![INDEX_FORMAT_VERSION];
        // Only ordered maps and vectors inside; serialization cannot fail.
        bytes.extend(serde_json::to_vec(self).expect("collection serializes"));
        bytes
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })?;
        let Some((&version, payload)) = bytes.split_first() else {
            return Err(CorpusError::IndexFormat {
                path: path.to_owned(),
                message: "empty file".into(),
            });
        };
        if version != INDEX_FORMAT_VERSION {
            return Err(CorpusError::IndexVersion {
                path: path.to_owned(),
                found: version,
            });
        }
        let loaded: Collection =
            serde_json::from_slice(payload).map_err(|e| CorpusError::IndexFormat {
                path: path.to_owned(),
                message: e.to_string(),
            })?;
        Ok(Self::assemble(loaded.documents, loaded.index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_jsonl_and_ignores_unknown_fields() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, r#"{{"doc_id":"a","title":"T","body":"x y","lang":"en"}}"#).unwrap();
        writeln!(file).unwrap();
        writeln!(file, r#"{{"doc_id":"b","title":"","body":"z"}}"#).unwrap();
        let docs = load_corpus(file.path()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].title, "T");
    }

    #[test]
    fn bad_record_names_line() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, r#"{{"doc_id":"a","title":"","body":"x"}}"#).unwrap();
        writeln!(file, r#"{{"doc_id":"b","title":""}}"#).unwrap();
        let err = load_corpus(file.path()).unwrap_err();
        assert!(matches!(err, CorpusError::Record { line: 2, .. }), "{err}");
    }

    #[test]
    fn blank_body_rejected() {
        let err = Collection::build(vec![Document::new("a", "t", "   ")]).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyBody(_)));
        let err = Collection::build(vec![Document::new("", "t", "b")]).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyDocId));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_corpus("/nonexistent/corpus.jsonl").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/corpus.jsonl"));
    }

    #[test]
    fn save_load_roundtrip_and_version_byte() {
        let collection = Collection::build(vec![
            Document::new("a", "Rail", "strikes spread"),
            Document::new("b", "", "markets fall"),
        ])
        .unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        collection.save(file.path()).unwrap();
        let bytes = fs::read(file.path()).unwrap();
        assert_eq!(bytes[0], INDEX_FORMAT_VERSION);
        let loaded = Collection::load(file.path()).unwrap();
        assert_eq!(loaded.index(), collection.index());
        assert_eq!(loaded.get("b").unwrap().body, "markets fall");
        assert_eq!(loaded.to_bytes(), bytes);
    }

    #[test]
    fn wrong_version_rejected() {
        let file = tempfile::NamedTempFile::new().unwrap();
        fs::write(file.path(), b"\x07{}").unwrap();
        let err = Collection::load(file.path()).unwrap_err();
        assert!(matches!(err, CorpusError::IndexVersion { found: 7, .. }));
    }

    #[test]
    fn snippet_counts_characters() {
        let doc = Document::new("a", "", "é".repeat(300));
        assert_eq!(doc.snippet(200).chars().count(), 200);
    }

    #[test]
    fn explain_target_covers_title_and_body() {
        let collection = Collection::build(vec![Document::new("a", "Rail news", "strikes spread")]).unwrap();
        let target = collection.explain_target("a").unwrap();
        assert!(target.prefix().is_empty());
        assert_eq!(target.doc().tokens, vec!["rail", "news", "strikes", "spread"]);
    }
}
