//! HTTP service for interactive use.
//!
//! `POST /v1/enhance` runs one prompt through the re-ranker; `GET /healthz`
//! reports liveness. Requests carry a single prompt and nothing else, so no
//! conversation history ever reaches the backend.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use sdea_core::generation::{Backend, DecodingParams, GenerationError, ParamsError};
use sdea_core::reranker::{enhance_with, EnhanceError, EnhancedResult, Protocol};
use sdea_core::{Lexicon, SdLevel};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

/// Immutable state shared by all requests.
pub struct ServiceState {
    pub backend: Arc<dyn Backend>,
    pub lexicon: Arc<Lexicon>,
    pub params: DecodingParams,
    pub protocol: Protocol,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnhanceRequest {
    pub prompt: String,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub params: Option<ParamsOverride>,
}

/// Per-request decoding overrides; unset fields use the service defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsOverride {
    pub top_p: Option<f64>,
    pub sequence_length: Option<u32>,
    pub temperature: Option<f64>,
    pub seed: Option<u64>,
}

impl ParamsOverride {
    fn apply(&self, base: &DecodingParams) -> Result<DecodingParams, ParamsError> {
        DecodingParams::new(
            self.top_p.unwrap_or(base.top_p()),
            self.sequence_length.unwrap_or(base.sequence_length()),
            self.temperature.unwrap_or(base.temperature()),
            self.seed.or(base.seed()),
        )
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LeveledText {
    pub text: String,
    pub level: SdLevel,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CandidateView {
    pub text: String,
    pub level: SdLevel,
    pub index: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EnhanceResponse {
    pub vanilla: LeveledText,
    pub enhanced: Option<LeveledText>,
    pub candidates: Vec<CandidateView>,
    pub not_found: bool,
}

impl From<EnhancedResult> for EnhanceResponse {
    fn from(r: EnhancedResult) -> Self {
        let not_found = r.not_found();
        Self {
            vanilla: LeveledText {
                text: r.vanilla.candidate.text,
                level: r.vanilla.level,
            },
            enhanced: r.enhanced.map(|e| LeveledText {
                text: e.candidate.text,
                level: e.level,
            }),
            candidates: r
                .candidates
                .into_iter()
                .map(|c| CandidateView {
                    text: c.candidate.text,
                    level: c.level,
                    index: c.candidate.index,
                })
                .collect(),
            not_found,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code.to_string(),
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<EnhanceError> for ApiError {
    fn from(err: EnhanceError) -> Self {
        let message = err.to_string();
        match err {
            EnhanceError::InvalidRequest(ParamsError::EmptyPrompt) => {
                ApiError::new(StatusCode::BAD_REQUEST, "empty_prompt", message)
            }
            EnhanceError::InvalidRequest(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_params", message)
            }
            EnhanceError::Generation(GenerationError::UnknownPrompt { .. }) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_prompt", message)
            }
            EnhanceError::Generation(GenerationError::Timeout { .. }) => {
                ApiError::new(StatusCode::GATEWAY_TIMEOUT, "backend_timeout", message)
            }
            EnhanceError::Generation(_) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "backend_error", message)
            }
            EnhanceError::EmptyGeneration { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "empty_generation", message)
            }
        }
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/v1/enhance", post(enhance_handler))
        .route("/healthz", get(healthz))
        .layer(CorsLayer::permissive())
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn enhance_handler(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<EnhanceRequest>, JsonRejection>,
) -> Result<Json<EnhanceResponse>, ApiError> {
    let Json(req) =
        body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.body_text()))?;
    if req.prompt.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_prompt", "prompt is empty"));
    }
    let target = match req.target.as_deref() {
        None => SdLevel::Medium,
        Some(t) => match t {
            "G" => SdLevel::General,
            "M" => SdLevel::Medium,
            "H" => SdLevel::High,
            other => {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "invalid_target",
                    format!("target must be G, M or H, got {other:?}"),
                ))
            }
        },
    };
    let params = req
        .params
        .unwrap_or_default()
        .apply(&state.params)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_params", e.to_string()))?;
    let result = enhance_with(
        &req.prompt,
        target,
        &params,
        state.backend.as_ref(),
        &state.lexicon,
        state.protocol,
    )
    .await?;
    Ok(Json(result.into()))
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: SocketAddr, state: Arc<ServiceState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, backend = state.backend.id(), "serving");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
