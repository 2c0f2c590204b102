//! Batch front end: same engine as the service, JSON on stdout, diagnostics
//! on stderr.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 contract or degenerate-region
//! errors.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{Collection, CorpusError};
use crate::engine::{
    Defaults, Engine, EngineError, ExplainPairRequest, ExplainRequest, IntentRequest, SearchRequest,
};
use crate::explainer::ConverterKind;
use crate::rankers::{load_embeddings, EmbeddingError};
use crate::service::{self, ServiceConfig, StartupError};

#[derive(Debug, Parser)]
#[command(name = "xsearch", version, about = "Search and explain rankings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index file from a JSONL corpus.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank documents for a query.
    Search {
        #[command(flatten)]
        source: Source,
        #[arg(long = "q")]
        q: String,
        #[arg(long)]
        ranker: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Explain why a document is relevant to a query.
    Explain {
        #[command(flatten)]
        source: Source,
        #[arg(long = "q")]
        q: String,
        #[arg(long)]
        doc_id: String,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Explain why one document is ranked above another.
    ExplainPair {
        #[command(flatten)]
        source: Source,
        #[arg(long = "q")]
        q: String,
        #[arg(long)]
        doc_a_id: String,
        #[arg(long)]
        doc_b_id: String,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Explain what the ranker takes the query to be about.
    Intent {
        #[command(flatten)]
        source: Source,
        #[arg(long = "q")]
        q: String,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Run the HTTP service.
    Serve {
        /// JSONL corpus or index file.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value = "topk")]
        converter: ConverterKind,
        #[arg(long, default_value_t = 2000)]
        n_samples: usize,
        #[arg(long, default_value_t = 100)]
        pool_size: usize,
    },
}

#[derive(Debug, Args)]
pub struct Source {
    /// Index file written by `xsearch index` (a JSONL corpus also works).
    #[arg(long)]
    index: PathBuf,
    /// GloVe-format embedding file enabling the `embed` ranker.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pool_size: usize,
}

#[derive(Debug, Args)]
pub struct Knobs {
    #[arg(long)]
    ranker: Option<String>,
    #[arg(long)]
    converter: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_words: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Contract(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Contract(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Contract(m) => m,
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } | CorpusError::IndexFormat { .. } | CorpusError::IndexVersion { .. } => {
                Failure::Io(e.to_string())
            }
            _ => Failure::Contract(e.to_string()),
        }
    }
}

impl From<EmbeddingError> for Failure {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Contract(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Contract(e.to_string())
    }
}

impl From<StartupError> for Failure {
    fn from(e: StartupError) -> Self {
        match e {
            StartupError::Corpus(e) => e.into(),
            StartupError::Embeddings(e) => e.into(),
            StartupError::Bind { .. } => Failure::Io(e.to_string()),
            StartupError::Config(_) => Failure::Contract(e.to_string()),
        }
    }
}

fn open(source: &Source) -> Result<Engine, Failure> {
    let collection = Collection::open(&source.index)?;
    let embeddings = source.embeddings.as_ref().map(load_embeddings).transpose()?;
    if source.pool_size == 0 {
        return Err(Failure::Contract("--pool-size must be at least 1".into()));
    }
    let defaults = Defaults {
        pool_size: source.pool_size,
        ..Defaults::default()
    };
    Ok(Engine::new(collection, embeddings, defaults))
}

fn emit(value: &impl Serialize) {
    println!("{}", serde_json::to_string(value).expect("response serializes"));
}

/// Clamps an over-large `--n-words` to the document's vocabulary.
fn clamp_n_words(engine: &Engine, doc_id: &str, n_words: Option<usize>) -> Option<usize> {
    let requested = n_words?;
    match engine.vocabulary_size(doc_id) {
        Some(vocabulary) if requested > vocabulary => {
            eprintln!(
                "warning: --n-words {requested} exceeds the {vocabulary} distinct terms of \"{doc_id}\"; using {vocabulary}"
            );
            Some(vocabulary.max(1))
        }
        _ => Some(requested),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Index { corpus, out } => {
            let collection = Collection::from_corpus_file(&corpus)?;
            collection.save(&out)?;
            println!(
                "indexed {} documents (avg_doc_length {:.2})",
                collection.index().doc_count(),
                collection.index().avg_doc_length()
            );
        }
        Command::Search { source, q, ranker, k } => {
            let engine = open(&source)?;
            emit(&engine.search(&SearchRequest { q, ranker, k })?);
        }
        Command::Explain {
            source,
            q,
            doc_id,
            knobs,
        } => {
            let engine = open(&source)?;
            let n_words = clamp_n_words(&engine, &doc_id, knobs.n_words);
            emit(&engine.explain(&ExplainRequest {
                q,
                doc_id,
                ranker: knobs.ranker,
                converter: knobs.converter,
                k: knobs.k,
                n_words,
                n_samples: knobs.n_samples,
                seed: knobs.seed,
            })?);
        }
        Command::ExplainPair {
            source,
            q,
            doc_a_id,
            doc_b_id,
            knobs,
        } => {
            let engine = open(&source)?;
            let n_words = clamp_n_words(&engine, &doc_a_id, knobs.n_words);
            emit(&engine.explain_pair(&ExplainPairRequest {
                q,
                doc_a_id,
                doc_b_id,
                ranker: knobs.ranker,
                converter: knobs.converter,
                k: knobs.k,
                n_words,
                n_samples: knobs.n_samples,
                seed: knobs.seed,
            })?);
        }
        Command::Intent { source, q, knobs } => {
            let engine = open(&source)?;
            emit(&engine.intent(&IntentRequest {
                q,
                ranker: knobs.ranker,
                converter: knobs.converter,
                k: knobs.k,
                n_words: knobs.n_words,
                n_samples: knobs.n_samples,
                seed: knobs.seed,
            })?);
        }
        Command::Serve {
            corpus,
            embeddings,
            listen,
            k,
            converter,
            n_samples,
            pool_size,
        } => {
            let config = ServiceConfig {
                corpus_path: corpus,
                embedding_path: embeddings,
                listen_address: listen,
                default_k: k,
                default_converter: converter,
                default_n_samples: n_samples,
                pool_size,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            runtime.block_on(service::serve(config))?;
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}
