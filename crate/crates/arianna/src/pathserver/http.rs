//! JSON over HTTP/1.1 for the path server.

use std::sync::Arc;

use arianna_core::navigator::{EdgeHint, SessionId};
use arianna_core::pathgraph::{EdgeId, NodeId, QrId};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{AdminPatch, PathServer, ServerError};

impl IntoResponse for ServerError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = match &self {
            ServerError::Rejected(report) => json!({ "error": self.to_string(), "report": report }),
            _ => json!({ "error": self.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionRequest {
    pub destination: NodeId,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: SessionId,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PatchApplied {
    pub version: u64,
}

#[derive(Debug, Deserialize)]
struct QrQuery {
    session: Option<String>,
    /// `edge:decimeters`
    edge_hint: Option<String>,
}

fn parse_hint(s: &str) -> Option<EdgeHint> {
    let (e, d) = s.split_once(':')?;
    Some(EdgeHint { edge: EdgeId(e.parse().ok()?), decimeters: d.parse().ok()? })
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ServerError> {
    serde_json::from_slice(body).map_err(|e| ServerError::BadRequest(e.to_string()))
}

async fn create_session(State(s): State<Arc<PathServer>>, body: Bytes) -> Result<Json<SessionCreated>, ServerError> {
    let req: SessionRequest = parse_json(&body)?;
    Ok(Json(SessionCreated { session_id: s.create_session(req.destination)? }))
}

async fn resolve(
    State(s): State<Arc<PathServer>>,
    Path(qr): Path<u16>,
    Query(q): Query<QrQuery>,
) -> Result<Response, ServerError> {
    let session = q.session.as_deref().and_then(|v| v.parse::<SessionId>().ok()).ok_or(ServerError::Unauthorized)?;
    let hint = match q.edge_hint.as_deref() {
        None => None,
        Some(h) => Some(parse_hint(h).ok_or_else(|| ServerError::BadRequest(format!("edge_hint {h:?}")))?),
    };
    Ok(Json(s.resolve_qr(QrId(qr), session, hint)?).into_response())
}

async fn patch(State(s): State<Arc<PathServer>>, body: Bytes) -> Result<Json<PatchApplied>, ServerError> {
    let p: AdminPatch = parse_json(&body)?;
    // Persistence does blocking file IO.
    let version = tokio::task::spawn_blocking(move || s.apply_patch(&p))
        .await
        .map_err(|e| ServerError::Storage(e.to_string()))??;
    Ok(Json(PatchApplied { version }))
}

async fn deployment(State(s): State<Arc<PathServer>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], s.deployment_json()).into_response()
}

async fn health(State(s): State<Arc<PathServer>>) -> Response {
    Json(s.health()).into_response()
}

pub fn router(server: Arc<PathServer>) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/qr/{qr_id}", get(resolve))
        .route("/admin/patch", put(patch))
        .route("/deployment", get(deployment))
        .route("/health", get(health))
        .with_state(server)
}
