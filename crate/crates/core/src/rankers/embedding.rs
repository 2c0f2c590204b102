use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{Query, Ranker};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file is empty")]
    Empty,
    #[error("line {line}: no vector components")]
    NoComponents { line: usize },
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: component \"{token}\" is not a finite number")]
    NonNumeric { line: usize, token: String },
}

/// Word vectors in GloVe text format.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    /// Parses `word v1 ... vd` rows. The first row fixes the dimension.
    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (i, row) in text.lines().enumerate() {
            let line = i + 1;
            let mut fields = row.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let vector = fields
                .map(|token| match token.parse::<f32>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(EmbeddingError::NonNumeric {
                        line,
                        token: token.to_owned(),
                    }),
                })
                .collect::<Result<Vec<f32>, _>>()?;
            let expected = *dimension.get_or_insert(vector.len());
            if expected == 0 {
                return Err(EmbeddingError::NoComponents { line });
            }
            if vector.len() != expected {
                return Err(EmbeddingError::Dimension {
                    line,
                    expected,
                    found: vector.len(),
                });
            }
            vectors.insert(word.to_owned(), vector);
        }
        let dimension = dimension.ok_or(EmbeddingError::Empty)?;
        Ok(Self { dimension, vectors })
    }

    pub fn from_vectors(
        vectors: impl IntoIterator<Item = (String, Vec<f32>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut text = String::new();
        for (word, v) in vectors {
            text.push_str(&word);
            for x in v {
                text.push(' ');
                text.push_str(&x.to_string());
            }
            text.push('\n');
        }
        Self::from_text(&text)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&[f32]> {
        self.vectors.get(term).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary term vectors, or `None` when no term is
    /// in the table.
    pub fn centroid<'t>(&self, terms: impl IntoIterator<Item = &'t String>) -> Option<Vec<f64>> {
        let mut sum = vec![0.0f64; self.dimension];
        let mut count = 0usize;
        for v in terms.into_iter().filter_map(|t| self.get(t)) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += f64::from(x);
            }
            count += 1;
        }
        if count == 0 {
            return None;
        }
        sum.iter_mut().for_each(|s| *s /= count as f64);
        Some(sum)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.to_owned(),
        source,
    })?;
    EmbeddingTable::from_text(&text)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine between the query centroid and the document centroid. Terms
/// missing from the table are skipped; 0 when either side has none left.
pub fn embedding_score(query_terms: &[String], doc_tokens: &[String], table: &EmbeddingTable) -> f64 {
    match (table.centroid(query_terms), table.centroid(doc_tokens)) {
        (Some(q), Some(d)) => cosine(&q, &d),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingRanker<'a> {
    table: &'a EmbeddingTable,
}

impl<'a> EmbeddingRanker<'a> {
    pub fn new(table: &'a EmbeddingTable) -> Self {
        Self { table }
    }
}

impl Ranker for EmbeddingRanker<'_> {
    fn name(&self) -> &str {
        "embed"
    }

    fn score_tokens(&self, query: &Query, tokens: &[String]) -> f64 {
        embedding_score(&query.terms, tokens, self.table)
    }
}
