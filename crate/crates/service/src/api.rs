use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use argchat_core::dialogue::{DialogueError, SessionId, SessionManager, Snapshot, TurnOutcome};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

#[derive(Clone)]
pub struct AppState {
    manager: Arc<SessionManager>,
}

#[derive(Debug, Deserialize)]
pub struct TextBody {
    pub text: String,
}

#[derive(Debug, Serialize)]
pub struct CreatedSession {
    pub session_id: SessionId,
    pub outcome: TurnOutcome,
}

#[derive(Debug, Serialize)]
pub struct OutcomeBody {
    pub outcome: TurnOutcome,
}

#[derive(Debug, Serialize)]
pub struct KbSummary {
    pub status_args: usize,
    pub replies: usize,
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub kb: KbSummary,
}

/// Error envelope `{"error": {"code", "message"}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "BadRequest",
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal",
            message: message.into(),
        }
    }
}

impl From<DialogueError> for ApiError {
    fn from(e: DialogueError) -> Self {
        let status = match e {
            DialogueError::UnknownSession(_) => StatusCode::NOT_FOUND,
            DialogueError::SessionConcluded | DialogueError::NotClarifying => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

fn parse_id(raw: &str) -> Result<SessionId, ApiError> {
    SessionId::parse(raw).ok_or_else(|| DialogueError::UnknownSession(raw.to_owned()).into())
}

/// Runs blocking session work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, DialogueError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

fn log_outcome(id: &SessionId, outcome: &TurnOutcome) {
    tracing::info!(session = %id, outcome = outcome.kind.name(), "turn");
}

async fn health(State(app): State<AppState>) -> Json<Health> {
    let kb = app.manager.interviewer().kb();
    Json(Health {
        status: "ok",
        kb: KbSummary {
            status_args: kb.status_arguments().count(),
            replies: kb.reply_arguments().count(),
        },
    })
}

async fn create_session(State(app): State<AppState>) -> Result<(StatusCode, Json<CreatedSession>), ApiError> {
    let manager = app.manager.clone();
    let (session_id, outcome) = blocking(move || manager.create()).await?;
    log_outcome(&session_id, &outcome);
    Ok((StatusCode::CREATED, Json(CreatedSession { session_id, outcome })))
}

async fn post_message(
    State(app): State<AppState>,
    Path(raw): Path<String>,
    body: Result<Json<TextBody>, JsonRejection>,
) -> Result<Json<OutcomeBody>, ApiError> {
    let id = parse_id(&raw)?;
    let Json(TextBody { text }) = body?;
    let manager = app.manager.clone();
    let sid = id.clone();
    let outcome = blocking(move || manager.message(&sid, &text)).await?;
    log_outcome(&id, &outcome);
    Ok(Json(OutcomeBody { outcome }))
}

async fn post_clarification(
    State(app): State<AppState>,
    Path(raw): Path<String>,
    body: Result<Json<TextBody>, JsonRejection>,
) -> Result<Json<OutcomeBody>, ApiError> {
    let id = parse_id(&raw)?;
    let Json(TextBody { text }) = body?;
    let manager = app.manager.clone();
    let sid = id.clone();
    let outcome = blocking(move || manager.clarification(&sid, &text)).await?;
    log_outcome(&id, &outcome);
    Ok(Json(OutcomeBody { outcome }))
}

async fn get_session(State(app): State<AppState>, Path(raw): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let id = parse_id(&raw)?;
    let manager = app.manager.clone();
    Ok(Json(blocking(move || manager.snapshot(&id)).await?))
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        code: "NotFound",
        message: "no such route".to_owned(),
    }
}

pub fn router(manager: Arc<SessionManager>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/messages", post(post_message))
        .route("/api/sessions/{id}/clarification", post(post_clarification))
        .with_state(AppState { manager });
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: std::io::Error },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
    #[error("flushing session store: {0}")]
    Flush(#[from] DialogueError),
}

pub async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener, ServeError> {
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::BindFailure { addr, source })
}

/// Serves until `shutdown` resolves, then flushes the session store.
pub async fn serve(
    listener: tokio::net::TcpListener,
    manager: Arc<SessionManager>,
    static_dir: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let addr = listener.local_addr()?;
    tracing::info!("listening on {addr}");
    axum::serve(listener, router(manager.clone(), static_dir))
        .with_graceful_shutdown(shutdown)
        .await?;
    tracing::info!("shutting down");
    let m = manager.clone();
    tokio::task::spawn_blocking(move || m.flush())
        .await
        .map_err(std::io::Error::other)??;
    Ok(())
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
