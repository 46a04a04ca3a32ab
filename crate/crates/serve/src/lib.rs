//! JSON-over-HTTP front end for one [`TrainedModel`].
//!
//! Endpoints:
//! - `POST /v1/predict` — `{"text": "..."}` in, category and per-class scores out
//! - `GET /v1/health` — `{"status":"ok"}`
//! - `GET /v1/model` — model kind, classes, vocabulary size, format version

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use aztext::classify::{ClassifyError, ModelIoError};
use aztext::TrainedModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::net::TcpListener;

pub const DEFAULT_BODY_LIMIT: usize = 1024 * 1024;
pub const JSON_CONTENT_TYPE: &str = "application/json; charset=utf-8";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot load model: {0}")]
    Model(#[from] ModelIoError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServeConfig {
    pub bind: String,
    pub port: u16,
    pub body_limit: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig { bind: "127.0.0.1".into(), port: 8080, body_limit: DEFAULT_BODY_LIMIT }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredictRequest {
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub category: String,
    pub scores: BTreeMap<String, f64>,
    pub model_kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_kind: String,
    pub classes: Vec<String>,
    pub vocabulary_size: usize,
    pub format_version: u32,
}

impl ModelInfo {
    pub fn of(model: &TrainedModel) -> Self {
        ModelInfo {
            model_kind: model.kind().to_string(),
            classes: model.class_names.clone(),
            vocabulary_size: model.vectorizer.dim(),
            format_version: model.format_version,
        }
    }
}

/// Why a request was refused, mapped onto a status code.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RequestError {
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("text is empty")]
    EmptyText,
    #[error("request body exceeds the size limit")]
    TooLarge,
}

impl RequestError {
    pub fn status(&self) -> StatusCode {
        match self {
            RequestError::Malformed(_) => StatusCode::BAD_REQUEST,
            RequestError::EmptyText => StatusCode::UNPROCESSABLE_ENTITY,
            RequestError::TooLarge => StatusCode::PAYLOAD_TOO_LARGE,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            RequestError::Malformed(_) => "malformed_request",
            RequestError::EmptyText => "empty_input",
            RequestError::TooLarge => "payload_too_large",
        }
    }
}

impl IntoResponse for RequestError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        json_response(self.status(), &body)
    }
}

/// Decodes a predict body: a JSON object with a string `text` member.
/// Emptiness is checked later, after normalization.
pub fn parse_predict_request(body: &[u8]) -> Result<PredictRequest, RequestError> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| RequestError::Malformed(e.to_string()))?;
    let serde_json::Value::Object(mut object) = value else {
        return Err(RequestError::Malformed("body must be a JSON object".into()));
    };
    match object.remove("text") {
        Some(serde_json::Value::String(text)) => Ok(PredictRequest { text }),
        Some(_) => Err(RequestError::Malformed("`text` must be a string".into())),
        None => Err(RequestError::Malformed("missing `text`".into())),
    }
}

/// Runs one prediction exactly as the in-process API would.
pub fn predict(model: &TrainedModel, request: &PredictRequest) -> Result<PredictResponse, RequestError> {
    let prediction = model.predict_text(&request.text).map_err(|e| match e {
        ClassifyError::EmptyInput => RequestError::EmptyText,
        other => RequestError::Malformed(other.to_string()),
    })?;
    Ok(PredictResponse {
        category: prediction.label,
        scores: model.class_names.iter().cloned().zip(prediction.scores).collect(),
        model_kind: model.kind().to_string(),
    })
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, JSON_CONTENT_TYPE)], bytes).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn predict_handler(
    State(model): State<Arc<TrainedModel>>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, RequestError> {
    let body = body.map_err(|rejection| match rejection.status() {
        StatusCode::PAYLOAD_TOO_LARGE => RequestError::TooLarge,
        _ => RequestError::Malformed(rejection.body_text()),
    })?;
    let request = parse_predict_request(&body)?;
    let response = predict(&model, &request)?;
    Ok(json_response(StatusCode::OK, &response))
}

async fn health() -> Response {
    json_response(StatusCode::OK, &serde_json::json!({ "status": "ok" }))
}

async fn model_info(State(model): State<Arc<TrainedModel>>) -> Response {
    json_response(StatusCode::OK, &ModelInfo::of(&model))
}

pub fn router(model: Arc<TrainedModel>, body_limit: usize) -> Router {
    Router::new()
        .route("/v1/predict", post(predict_handler))
        .route("/v1/health", get(health))
        .route("/v1/model", get(model_info))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(model)
}

/// Serves on an already-bound listener until `shutdown` resolves.
pub async fn serve_on<F>(listener: TcpListener, model: Arc<TrainedModel>, body_limit: usize, shutdown: F) -> Result<(), ServeError>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, router(model, body_limit)).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

/// Loads the model, then binds and serves until Ctrl-C. A model that fails
/// to load aborts before any socket is opened.
pub async fn run(model_path: &Path, config: &ServeConfig) -> Result<(), ServeError> {
    let model = Arc::new(aztext::load_model(model_path)?);
    let addr = format!("{}:{}", config.bind, config.port);
    let listener =
        TcpListener::bind(&addr).await.map_err(|source| ServeError::Bind { addr: addr.clone(), source })?;
    let local: SocketAddr = listener.local_addr()?;
    tracing::info!(%local, kind = %model.kind(), classes = model.class_names.len(), "serving");
    serve_on(listener, model, config.body_limit, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_parsing() {
        assert_eq!(parse_predict_request(br#"{"text":"salam"}"#).unwrap().text, "salam");
        assert_eq!(parse_predict_request(br#"{"text":"","extra":1}"#).unwrap().text, "");
        for bad in [&b"{"[..], b"[]", b"[\"salam\"]", b"{\"txt\":\"a\"}", b"{\"text\":5}", b"", b"\xff"] {
            let err = parse_predict_request(bad).unwrap_err();
            assert_eq!(err.status(), StatusCode::BAD_REQUEST, "{bad:?}");
        }
    }

    #[test]
    fn status_codes() {
        assert_eq!(RequestError::EmptyText.status(), StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(RequestError::TooLarge.status(), StatusCode::PAYLOAD_TOO_LARGE);
    }
}
