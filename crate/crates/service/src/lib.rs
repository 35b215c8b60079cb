//! HTTP/JSON API over one synchronization project.
//!
//! Reads run concurrently; mutations are serialized behind a write lock,
//! persisted to the project file (when there is one) before they become
//! visible, and announced on `/api/events`.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use msync_core::persist::{load_project, save_project};
use msync_core::project::AuditEvent;
use msync_core::render::{render, Format};
use msync_core::sync::{apply_changeset, resolve_decision, ChangeSet, DecisionResolution, SyncReport};
use msync_core::{Error, Project, Side};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{broadcast, RwLock};

const EVENT_BUFFER: usize = 256;

struct Shared {
    project: Project,
    path: Option<PathBuf>,
}

/// Handle shared by all request handlers.
#[derive(Clone)]
pub struct AppState {
    shared: Arc<RwLock<Shared>>,
    events: broadcast::Sender<AuditEvent>,
}

impl AppState {
    /// Serve a project held in memory only.
    pub fn in_memory(project: Project) -> Self {
        Self::with_path(project, None)
    }

    /// Serve the project stored at `path`, writing every mutation back.
    pub fn open(path: PathBuf) -> msync_core::Result<Self> {
        let project = load_project(&path)?;
        Ok(Self::with_path(project, Some(path)))
    }

    fn with_path(project: Project, path: Option<PathBuf>) -> Self {
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        Self {
            shared: Arc::new(RwLock::new(Shared { project, path })),
            events,
        }
    }

    pub async fn snapshot(&self) -> Project {
        self.shared.read().await.project.clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<AuditEvent> {
        self.events.subscribe()
    }

    /// Run one mutation on a copy, persist it, then publish it.
    async fn mutate(
        &self,
        f: impl FnOnce(&mut Project) -> msync_core::Result<SyncReport>,
    ) -> Result<SyncReport, ApiError> {
        let mut guard = self.shared.write().await;
        let mut next = guard.project.clone();
        let report = f(&mut next)?;
        if let Some(path) = &guard.path {
            save_project(&next, path)?;
        }
        let event = next.audit.last().cloned();
        guard.project = next;
        if let Some(event) = event {
            // no subscribers is fine
            let _ = self.events.send(event);
        }
        Ok(report)
    }
}

/// Error response with body `{code, message, detail}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn not_found(what: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", format!("no such resource: {what}"))
    }
}

fn status_for(e: &Error) -> StatusCode {
    match e.root() {
        Error::StaleRequest(_) | Error::StepOrder(_) => StatusCode::CONFLICT,
        Error::UnknownRequest(_) => StatusCode::NOT_FOUND,
        Error::Io(_) | Error::Integrity(_) | Error::SchemaVersionMismatch { .. } => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let root = e.root();
        let detail = match &e {
            Error::ChangesetAborted { index, .. } => json!({"index": index, "cause": root.code()}),
            Error::Parse(p) => serde_json::to_value(p).unwrap_or(Value::Null),
            _ => Value::Null,
        };
        Self {
            status: status_for(&e),
            code: root.code().into(),
            message: e.to_string(),
            detail,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"code": self.code, "message": self.message, "detail": self.detail});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/project", get(project))
        .route("/api/matrices", get(matrices))
        .route("/api/render/{side}", get(render_side))
        .route("/api/decisions", get(decisions))
        .route("/api/decisions/{id}", post(resolve))
        .route("/api/changes", post(changes))
        .route("/api/verify", get(verify))
        .route("/api/audit", get(audit))
        .route("/api/events", get(events))
        .fallback(|| async { ApiError::not_found("route") })
        .with_state(state)
}

/// Bind `addr` and serve until the process stops.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

async fn project(State(s): State<AppState>) -> Json<Project> {
    Json(s.snapshot().await)
}

async fn matrices(State(s): State<AppState>) -> Json<Value> {
    let guard = s.shared.read().await;
    let p = &guard.project;
    let (n, m) = (p.n_matrix(), p.m_matrix());
    Json(json!({
        "revision": p.revision,
        "n": n.to_grid(),
        "m": m.to_grid(),
        "q": p.q_links.to_grid(&n, &m),
    }))
}

#[derive(Deserialize)]
struct RenderQuery {
    format: Option<String>,
}

async fn render_side(
    State(s): State<AppState>,
    Path(side): Path<String>,
    Query(q): Query<RenderQuery>,
) -> ApiResult<Response> {
    let side: Side = side.parse().map_err(|_| ApiError::not_found(&format!("model {side}")))?;
    let format: Format = q
        .format
        .as_deref()
        .unwrap_or("dot")
        .parse()
        .map_err(|m: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidFormat", m))?;
    let text = render(s.shared.read().await.project.model(side), format);
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

async fn decisions(State(s): State<AppState>) -> Json<Value> {
    let guard = s.shared.read().await;
    Json(json!({
        "revision": guard.project.revision,
        "decisions": guard.project.pending(),
    }))
}

#[derive(Deserialize)]
struct ResolveBody {
    choose: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    expected_revision: Option<u64>,
}

async fn resolve(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ResolveBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<SyncReport>> {
    let id: u64 = id.parse().map_err(|_| ApiError::not_found(&format!("decision {id}")))?;
    let Json(body) = body.map_err(invalid_payload)?;
    let resolution = DecisionResolution {
        request: id,
        choose: body.choose,
        label: body.label,
        expected_revision: body.expected_revision,
    };
    let report = s.mutate(|p| resolve_decision(p, &resolution)).await?;
    Ok(Json(report))
}

fn invalid_payload(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidPayload", e.to_string())
}

async fn changes(State(s): State<AppState>, body: String) -> ApiResult<Json<SyncReport>> {
    let changes = ChangeSet::from_json(&body).map_err(|e| {
        let mut err = invalid_payload(&e);
        err.code = e.code().into();
        err
    })?;
    let report = s.mutate(|p| apply_changeset(p, &changes)).await?;
    Ok(Json(report))
}

async fn verify(State(s): State<AppState>) -> ApiResult<Json<Value>> {
    let guard = s.shared.read().await;
    let p = &guard.project;
    let v = p.verify()?;
    Ok(Json(json!({
        "revision": p.revision,
        "synchronized": v.synchronized(),
        "passed": v.passed(),
        "verification": v,
    })))
}

async fn audit(State(s): State<AppState>) -> Json<Vec<AuditEvent>> {
    Json(s.shared.read().await.project.audit.clone())
}

async fn events(State(s): State<AppState>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = s.subscribe();
    let stream = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(e) => {
                    let event = Event::default()
                        .event(e.event.clone())
                        .id(e.seq.to_string())
                        .json_data(&e)
                        .unwrap_or_default();
                    return Some((Ok(event), rx));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}
