//! JSON HTTP API over one loaded pipeline artifact.
//!
//! | route          | success body                                              |
//! |----------------|-----------------------------------------------------------|
//! | `POST /predict`| `{"label","score","model"}`                               |
//! | `POST /explain`| `{"probabilities":{"ham","spam"},"tokens":[..],"fit"}`    |
//! | `GET /health`  | `{"status":"ok","model","format_version"}`                |
//! | `GET /stats`   | request counters                                          |
//!
//! Errors are `{"error": message}` with status 400 (bad request body, empty
//! text, non-positive `top_k`/`n_samples`), 413 (body over 1 MiB), 422 (no
//! tokens after preprocessing) or 503 (no artifact loaded).

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mailsift::artifact::PipelineArtifact;
use mailsift::explain::{self, ExplainConfig, Explanation};
use mailsift::Prediction;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const MAX_BODY_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub label: String,
    pub score: f64,
    pub model: String,
}

impl PredictResponse {
    pub fn new(p: &Prediction, model: &str) -> Self {
        Self {
            label: p.label.name().to_string(),
            score: p.score,
            model: model.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub ham: f64,
    pub spam: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEntry {
    pub token: String,
    pub position: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainResponse {
    pub probabilities: Probabilities,
    pub tokens: Vec<TokenEntry>,
    pub fit: f64,
}

impl From<&Explanation> for ExplainResponse {
    fn from(e: &Explanation) -> Self {
        Self {
            probabilities: Probabilities {
                ham: e.class_probs.ham,
                spam: e.class_probs.spam,
            },
            tokens: e
                .token_weights
                .iter()
                .map(|t| TokenEntry {
                    token: t.token.clone(),
                    position: t.position,
                    weight: t.weight,
                })
                .collect(),
            fit: e.surrogate_fit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model: String,
    pub format_version: u32,
}

#[derive(Debug, Default, Serialize)]
pub struct Stats {
    pub predict: u64,
    pub explain: u64,
    pub rejected: u64,
}

#[derive(Debug, Default)]
struct Counters {
    predict: AtomicU64,
    explain: AtomicU64,
    rejected: AtomicU64,
}

/// Shared, read-only service state.
#[derive(Debug, Default)]
pub struct AppState {
    artifact: Option<PipelineArtifact>,
    counters: Counters,
}

impl AppState {
    pub fn new(artifact: PipelineArtifact) -> Self {
        Self {
            artifact: Some(artifact),
            counters: Counters::default(),
        }
    }

    /// A service with nothing loaded; every model route answers 503.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> Stats {
        Stats {
            predict: self.counters.predict.load(Ordering::Relaxed),
            explain: self.counters.explain.load(Ordering::Relaxed),
            rejected: self.counters.rejected.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub enum Cors {
    /// No CORS headers: same-origin only.
    #[default]
    SameOrigin,
    Origins(Vec<String>),
    Any,
}

#[derive(Deserialize)]
struct PredictRequest {
    text: Option<String>,
}

#[derive(Deserialize)]
struct ExplainRequest {
    text: Option<String>,
    top_k: Option<i64>,
    n_samples: Option<i64>,
    seed: Option<u64>,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

pub fn router(state: Arc<AppState>, cors: Cors) -> Router {
    let app = Router::new()
        .route("/predict", post(predict))
        .route("/explain", post(explain_route))
        .route("/health", get(health))
        .route("/stats", get(stats))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state);
    match cors {
        Cors::SameOrigin => app,
        Cors::Any => app.layer(CorsLayer::permissive()),
        Cors::Origins(list) => {
            let origins: Vec<HeaderValue> = list.iter().filter_map(|o| o.parse().ok()).collect();
            app.layer(
                CorsLayer::new()
                    .allow_origin(AllowOrigin::list(origins))
                    .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
                    .allow_headers([axum::http::header::CONTENT_TYPE]),
            )
        }
    }
}

fn loaded(state: &AppState) -> Result<&PipelineArtifact, ApiError> {
    state
        .artifact
        .as_ref()
        .ok_or_else(|| ApiError(StatusCode::SERVICE_UNAVAILABLE, "no model artifact loaded".into()))
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| bad_request(format!("invalid request body: {e}")))
}

fn required_text(text: Option<String>) -> Result<String, ApiError> {
    match text {
        Some(t) if !t.trim().is_empty() => Ok(t),
        Some(_) => Err(bad_request("text is empty")),
        None => Err(bad_request("missing field `text`")),
    }
}

fn count_rejection<T>(state: &AppState, r: Result<T, ApiError>) -> Result<T, ApiError> {
    if r.is_err() {
        state.counters.rejected.fetch_add(1, Ordering::Relaxed);
    }
    r
}

async fn predict(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<PredictResponse>, ApiError> {
    let r = predict_inner(&state, &body);
    count_rejection(&state, r).map(Json)
}

fn predict_inner(state: &AppState, body: &Bytes) -> Result<PredictResponse, ApiError> {
    let art = loaded(state)?;
    let req: PredictRequest = parse(body)?;
    let text = required_text(req.text)?;
    let tokens = art.pipeline.tokenize(&text);
    if tokens.is_empty() {
        return Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, "text has no analyzable tokens".into()));
    }
    let p = art
        .pipeline
        .predict_tokens(&tokens)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    state.counters.predict.fetch_add(1, Ordering::Relaxed);
    Ok(PredictResponse::new(&p, art.model_tag()))
}

async fn explain_route(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<ExplainResponse>, ApiError> {
    let job = state.clone();
    let r = tokio::task::spawn_blocking(move || explain_inner(&job, &body))
        .await
        .unwrap_or_else(|e| Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())));
    count_rejection(&state, r).map(Json)
}

fn positive(v: Option<i64>, name: &str, default: usize) -> Result<usize, ApiError> {
    match v {
        None => Ok(default),
        Some(n) if n >= 1 => Ok(n as usize),
        Some(n) => Err(bad_request(format!("{name} must be positive, got {n}"))),
    }
}

fn explain_inner(state: &AppState, body: &Bytes) -> Result<ExplainResponse, ApiError> {
    let art = loaded(state)?;
    let req: ExplainRequest = parse(body)?;
    let text = required_text(req.text)?;
    let defaults = ExplainConfig::default();
    let cfg = ExplainConfig {
        top_k: positive(req.top_k, "top_k", defaults.top_k)?,
        n_samples: positive(req.n_samples, "n_samples", defaults.n_samples)?.min(20_000),
        seed: req.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let e = explain::explain(&art.pipeline, &text, &cfg).map_err(|e| match e {
        explain::ExplainError::EmptyDocument => ApiError(StatusCode::UNPROCESSABLE_ENTITY, "text has no analyzable tokens".into()),
        other => ApiError(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    })?;
    state.counters.explain.fetch_add(1, Ordering::Relaxed);
    Ok(ExplainResponse::from(&e))
}

async fn health(State(state): State<Arc<AppState>>) -> Result<Json<HealthResponse>, ApiError> {
    let art = loaded(&state)?;
    Ok(Json(HealthResponse {
        status: "ok".into(),
        model: art.model_tag().into(),
        format_version: art.format_version,
    }))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<Stats> {
    Json(state.stats())
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr, cors: Cors) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("mailsift: listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
