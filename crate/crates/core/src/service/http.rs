use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use super::{Campaign, ServiceError};

#[derive(Debug, Deserialize)]
struct NewSession {
    assessor_id: String,
    topic_id: u32,
}

#[derive(Debug, Deserialize)]
struct NewJudgment {
    doc_id: String,
    relevant: bool,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownTopic(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::DuplicateSession { .. } => StatusCode::CONFLICT,
            ServiceError::DocNotInPool { .. } | ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Data(_) | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::Invalid(e.body_text()))
}

type Shared = State<Arc<Campaign>>;

async fn list_topics(State(c): Shared) -> Response {
    Json(c.list_topics()).into_response()
}

async fn create_session(State(c): Shared, payload: Result<Json<NewSession>, JsonRejection>) -> Result<Response, ServiceError> {
    let req = body(payload)?;
    let info = tokio::task::spawn_blocking(move || c.create_session(&req.assessor_id, req.topic_id))
        .await
        .expect("session task panicked")?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn documents(State(c): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(c.get_documents(&id)?).into_response())
}

async fn submit(
    State(c): Shared,
    Path(id): Path<String>,
    payload: Result<Json<NewJudgment>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let req = body(payload)?;
    let ack = tokio::task::spawn_blocking(move || c.submit_judgment(&id, &req.doc_id, req.relevant))
        .await
        .expect("judgment task panicked")?;
    Ok(Json(ack).into_response())
}

async fn export(State(c): Shared) -> Response {
    ([(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")], c.export_text()).into_response()
}

/// Routes of the assessment API. With `ui_dir` set, unmatched paths are
/// served from that directory.
pub fn router(campaign: Arc<Campaign>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/topics", get(list_topics))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/documents", get(documents))
        .route("/sessions/{id}/judgments", post(submit))
        .route("/export/judgments", get(export))
        .with_state(campaign);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(campaign: Arc<Campaign>, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(campaign, ui_dir)).await
}
