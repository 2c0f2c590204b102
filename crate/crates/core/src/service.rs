//! JSON-over-HTTP interface.
//!
//! | method | path            | body / query                         |
//! |--------|-----------------|--------------------------------------|
//! | GET    | `/meta`         |                                      |
//! | GET    | `/search`       | `q`, `ranker`, `k`                   |
//! | POST   | `/explain`      | [`ExplainRequest`]                   |
//! | POST   | `/explain_pair` | [`ExplainPairRequest`]               |
//! | POST   | `/intent`       | [`IntentRequest`]                    |
//!
//! Failures return `{"error": {"code", "message"}}` with a 4xx status.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::corpus::{Collection, CorpusError};
use crate::engine::{
    Defaults, Engine, EngineError, ExplainPairRequest, ExplainRequest, IntentRequest, SearchRequest,
};
use crate::explainer::ConverterKind;
use crate::rankers::{load_embeddings, EmbeddingError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// JSONL corpus or index file.
    pub corpus_path: PathBuf,
    pub embedding_path: Option<PathBuf>,
    pub listen_address: SocketAddr,
    pub default_k: usize,
    pub default_converter: ConverterKind,
    pub default_n_samples: usize,
    pub pool_size: usize,
}

impl ServiceConfig {
    pub fn new(corpus_path: impl Into<PathBuf>) -> Self {
        let defaults = Defaults::default();
        Self {
            corpus_path: corpus_path.into(),
            embedding_path: None,
            listen_address: SocketAddr::from(([127, 0, 0, 1], 8080)),
            default_k: defaults.k,
            default_converter: defaults.converter,
            default_n_samples: defaults.n_samples,
            pool_size: defaults.pool_size,
        }
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("embeddings: {0}")]
    Embeddings(#[from] EmbeddingError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot listen on {address}: {source}")]
    Bind {
        address: SocketAddr,
        #[source]
        source: std::io::Error,
    },
}

/// Loads the corpus and embeddings named by `config`.
pub fn load_engine(config: &ServiceConfig) -> Result<Engine, StartupError> {
    if config.default_k == 0 {
        return Err(StartupError::Config("default_k must be at least 1".into()));
    }
    if config.pool_size == 0 {
        return Err(StartupError::Config("pool_size must be at least 1".into()));
    }
    let collection = Collection::open(&config.corpus_path)?;
    let embeddings = config.embedding_path.as_ref().map(load_embeddings).transpose()?;
    let defaults = Defaults {
        k: config.default_k,
        converter: config.default_converter,
        n_samples: config.default_n_samples,
        pool_size: config.pool_size,
        ..Defaults::default()
    };
    Ok(Engine::new(collection, embeddings, defaults))
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        Self {
            status: StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl ApiError {
    fn bad_request(message: String) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message,
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T, F>(engine: Arc<Engine>, work: F) -> ApiResult<T>
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Engine) -> Result<T, EngineError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || work(&engine))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: e.to_string(),
        })?
        .map(Json)
        .map_err(ApiError::from)
}

async fn meta(State(engine): State<Arc<Engine>>) -> Json<crate::engine::Meta> {
    Json(engine.meta())
}

async fn search(
    State(engine): State<Arc<Engine>>,
    request: Result<Query<SearchRequest>, QueryRejection>,
) -> ApiResult<crate::engine::SearchResponse> {
    let Query(request) = request?;
    blocking(engine, move |e| e.search(&request)).await
}

async fn explain(
    State(engine): State<Arc<Engine>>,
    request: Result<Json<ExplainRequest>, JsonRejection>,
) -> ApiResult<crate::explainer::Explanation> {
    let Json(request) = request?;
    blocking(engine, move |e| e.explain(&request)).await
}

async fn explain_pair(
    State(engine): State<Arc<Engine>>,
    request: Result<Json<ExplainPairRequest>, JsonRejection>,
) -> ApiResult<crate::explainer::Explanation> {
    let Json(request) = request?;
    blocking(engine, move |e| e.explain_pair(&request)).await
}

async fn intent(
    State(engine): State<Arc<Engine>>,
    request: Result<Json<IntentRequest>, JsonRejection>,
) -> ApiResult<crate::explainer::IntentExplanation> {
    let Json(request) = request?;
    blocking(engine, move |e| e.intent(&request)).await
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/search", get(search))
        .route("/explain", post(explain))
        .route("/explain_pair", post(explain_pair))
        .route("/intent", post(intent))
        .with_state(engine)
}

pub async fn serve(config: ServiceConfig) -> Result<(), StartupError> {
    let engine = Arc::new(load_engine(&config)?);
    let listener = tokio::net::TcpListener::bind(config.listen_address)
        .await
        .map_err(|source| StartupError::Bind {
            address: config.listen_address,
            source,
        })?;
    eprintln!(
        "serving {} documents on http://{}",
        engine.collection().len(),
        config.listen_address
    );
    axum::serve(listener, router(engine))
        .await
        .map_err(|source| StartupError::Bind {
            address: config.listen_address,
            source,
        })
}
