//! JSON over HTTP: `POST /ask`, `GET /health`, `GET /ontology`.

use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;

use super::{AskError, AskOptions, Engine};

/// Shared handle to an engine that may still be loading.
#[derive(Clone, Default)]
pub struct ServiceState {
    engine: Arc<OnceLock<Engine>>,
}

impl ServiceState {
    pub fn loading() -> Self {
        Self::default()
    }

    pub fn ready(engine: Engine) -> Self {
        let s = Self::default();
        s.install(engine);
        s
    }

    /// Makes the engine available; later calls are ignored.
    pub fn install(&self, engine: Engine) {
        let _ = self.engine.set(engine);
    }

    pub fn is_ready(&self) -> bool {
        self.engine.get().is_some()
    }
}

#[derive(Deserialize)]
struct AskRequest {
    question: String,
    #[serde(default = "yes")]
    execute: bool,
    #[serde(default = "yes")]
    trace: bool,
}

fn yes() -> bool {
    true
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn not_ready() -> Response {
    (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "status": "loading" }))).into_response()
}

async fn health(State(s): State<ServiceState>) -> Response {
    match s.engine.get() {
        Some(e) => Json(json!({
            "status": "ok",
            "triples": e.kg().store.len(),
            "materialized": e.materialized_predicates(),
        }))
        .into_response(),
        None => not_ready(),
    }
}

async fn ontology(State(s): State<ServiceState>) -> Response {
    match s.engine.get() {
        Some(e) => Json(e.ontology_catalog()).into_response(),
        None => not_ready(),
    }
}

async fn ask(State(s): State<ServiceState>, body: Bytes) -> Response {
    if !s.is_ready() {
        return not_ready();
    }
    let req: AskRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")),
    };
    if req.question.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, AskError::EmptyQuestion.to_string());
    }
    let opts = AskOptions {
        execute: req.execute,
        trace: req.trace,
    };
    let state = s.clone();
    let result = tokio::task::spawn_blocking(move || {
        let engine = state.engine.get().expect("checked ready");
        engine.ask(&req.question, opts)
    })
    .await;
    match result {
        Ok(Ok(r)) => Json(r).into_response(),
        Ok(Err(AskError::EmptyQuestion)) => error(StatusCode::BAD_REQUEST, AskError::EmptyQuestion.to_string()),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("request task failed: {e}")),
    }
}

pub fn router(state: ServiceState) -> Router {
    Router::new()
        .route("/ask", post(ask))
        .route("/health", get(health))
        .route("/ontology", get(ontology))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: ServiceState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
