//! HTTP+JSON API. See `docs/review-api.md` for the wire format.

use std::future::Future;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::ReviewError;
use crate::project::{ExportOptions, Project};
use crate::task::{Action, AnnotationTask};

#[derive(Debug, Clone, Default)]
pub struct ApiConfig {
    /// Shared token; when set every `/api` request must carry it.
    pub token: Option<String>,
    /// Static files served at `/` (the review UI build).
    pub assets: Option<PathBuf>,
    /// Where `POST /api/export` writes. Defaults to `<project>/export`.
    pub export_dir: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    project: Arc<Project>,
    cfg: Arc<ApiConfig>,
}

#[derive(Debug, Serialize)]
pub struct TaskView {
    #[serde(flatten)]
    pub task: AnnotationTask,
    pub image_url: String,
}

impl From<AnnotationTask> for TaskView {
    fn from(task: AnnotationTask) -> Self {
        let image_url = format!("/api/images/{}", task.sample_id);
        Self { task, image_url }
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

pub struct ApiError(StatusCode, &'static str, String);

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let status = match &e {
            ReviewError::UnknownTask(_) | ReviewError::UnknownSampleId(_) => StatusCode::NOT_FOUND,
            ReviewError::NotClaimedByYou { .. }
            | ReviewError::IllegalTransition { .. }
            | ReviewError::Incomplete { .. }
            | ReviewError::EmptyBench
            | ReviewError::ProjectExists(_) => StatusCode::CONFLICT,
            ReviewError::EmptyCorrection | ReviewError::InvalidReviewer => StatusCode::UNPROCESSABLE_ENTITY,
            ReviewError::Dataset(darijakit_core::dataset::DatasetError::OutputExists(_)) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %e, "request failed");
        }
        ApiError(status, e.kind(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1, message: self.2 })).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, "bad_request", msg.into())
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| bad_request(format!("invalid JSON body: {e}")))
}

/// Runs blocking project work (fsync) off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ReviewError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Deserialize)]
struct NextQuery {
    reviewer: Option<String>,
}

#[derive(Serialize)]
struct NextResponse {
    task: Option<TaskView>,
}

async fn next_task(State(s): State<AppState>, Query(q): Query<NextQuery>) -> Result<Json<NextResponse>, ApiError> {
    let reviewer = q.reviewer.ok_or_else(|| bad_request("missing `reviewer` query parameter"))?;
    let task = blocking(move || s.project.claim_next(&reviewer)).await?;
    Ok(Json(NextResponse { task: task.map(TaskView::from) }))
}

async fn get_task(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<TaskView>, ApiError> {
    let task = s.project.task(&id).ok_or(ReviewError::UnknownTask(id))?;
    Ok(Json(task.into()))
}

#[derive(Deserialize)]
struct SubmitRequest {
    reviewer: String,
    #[serde(flatten)]
    action: Action,
}

async fn submit(
    State(s): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<TaskView>, ApiError> {
    let req: SubmitRequest = serde_json::from_slice(&body).map_err(|e| bad_request(format!("invalid submit body: {e}")))?;
    let task = blocking(move || s.project.submit(&id, req.action, &req.reviewer)).await?;
    Ok(Json(task.into()))
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReleaseRequest {
    reviewer: Option<String>,
}

async fn release(
    State(s): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<TaskView>, ApiError> {
    let req: ReleaseRequest = parse_body(&body)?;
    let task = blocking(move || s.project.release(&id, req.reviewer.as_deref())).await?;
    Ok(Json(task.into()))
}

async fn progress(State(s): State<AppState>) -> Json<crate::project::Progress> {
    Json(s.project.progress())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("tif" | "tiff") => "image/tiff",
        Some("webp") => "image/webp",
        Some("bmp") => "image/bmp",
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("woff2") => "font/woff2",
        Some("ttf") => "font/ttf",
        _ => "application/octet-stream",
    }
}

async fn file_response(path: PathBuf) -> Result<Response, ApiError> {
    match tokio::fs::read(&path).await {
        Ok(bytes) => Ok(([(header::CONTENT_TYPE, content_type(&path))], Body::from(bytes)).into_response()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(ApiError(StatusCode::NOT_FOUND, "not_found", format!("{} not found", path.display())))
        }
        Err(e) => Err(ReviewError::Io { path, source: e }.into()),
    }
}

async fn image(State(s): State<AppState>, UrlPath(sample_id): UrlPath<String>) -> Result<Response, ApiError> {
    let rec = s
        .project
        .sample(&sample_id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, "unknown_sample_id", format!("no task for sample `{sample_id}`")))?;
    file_response(rec.image_path.clone()).await
}

async fn export(State(s): State<AppState>, body: Bytes) -> Result<Json<crate::project::ExportSummary>, ApiError> {
    let opts: ExportOptions = parse_body(&body)?;
    let out = s.cfg.export_dir.clone().unwrap_or_else(|| s.project.dir().join("export"));
    let (_, summary) = blocking(move || s.project.export(&out, opts)).await?;
    Ok(Json(summary))
}

async fn asset(State(s): State<AppState>, req: Request) -> Result<Response, ApiError> {
    let not_found = || ApiError(StatusCode::NOT_FOUND, "not_found", format!("no route for {}", req.uri().path()));
    let Some(root) = s.cfg.assets.as_ref() else { return Err(not_found()) };
    let rel = req.uri().path().trim_start_matches('/');
    let rel = Path::new(if rel.is_empty() { "index.html" } else { rel });
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Err(not_found());
    }
    file_response(root.join(rel)).await
}

fn token_matches(expected: &str, got: &str) -> bool {
    let (a, b) = (expected.as_bytes(), got.as_bytes());
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

fn presented_token<'a>(headers: &'a HeaderMap, query: Option<&'a str>) -> Option<&'a str> {
    if let Some(v) = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()) {
        return v.strip_prefix("Bearer ");
    }
    if let Some(v) = headers.get("x-review-token").and_then(|v| v.to_str().ok()) {
        return Some(v);
    }
    // <img> tags cannot set headers
    query?.split('&').find_map(|kv| kv.strip_prefix("token="))
}

async fn require_token(State(s): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(expected) = s.cfg.token.as_deref() {
        let ok = presented_token(req.headers(), req.uri().query()).is_some_and(|t| token_matches(expected, t));
        if !ok {
            return ApiError(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong review token".into())
                .into_response();
        }
    }
    next.run(req).await
}

pub fn router(project: Arc<Project>, cfg: ApiConfig) -> Router {
    let state = AppState { project, cfg: Arc::new(cfg) };
    let api = Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/tasks/{id}", get(get_task))
        .route("/api/tasks/{id}/submit", post(submit))
        .route("/api/tasks/{id}/release", post(release))
        .route("/api/progress", get(progress))
        .route("/api/images/{sample_id}", get(image))
        .route("/api/export", post(export))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    api.fallback(asset).with_state(state)
}

/// Serves until `shutdown` resolves, then writes a snapshot.
pub async fn serve(
    project: Arc<Project>,
    cfg: ApiConfig,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(project.clone(), cfg);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    project.checkpoint().map_err(std::io::Error::other)
}
