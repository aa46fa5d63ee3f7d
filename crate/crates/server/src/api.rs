use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::Json;
use hanstream_core::session::{SceneState, SessionStatus, StoryInfo};
use hanstream_core::story::{parse_story, StoryError, StoryScript};
use serde::Serialize;
use serde_json::{json, Value};

use crate::hub::{SessionGone, SessionHandle};
use crate::AppState;

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    code: String,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    fn story(e: &StoryError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}

impl From<SessionGone> for ApiError {
    fn from(e: SessionGone) -> Self {
        Self::new(StatusCode::GONE, "session_closed", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn lookup(state: &AppState, id: &str) -> Result<SessionHandle, ApiError> {
    state
        .session(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`")))
}

pub async fn index() -> Html<&'static str> {
    Html(include_str!("index.html"))
}

pub async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

/// Checks a story document against the server's data directory without starting it.
pub async fn validate(State(state): State<Arc<AppState>>, body: axum::body::Bytes) -> ApiResult<StoryInfo> {
    let story = parse_story(&body, state.base_dir()).map_err(|e| ApiError::story(&e))?;
    let session = hanstream_core::session::Session::new(story);
    Ok(Json(session.story_info()))
}

pub async fn list_sessions(State(state): State<Arc<AppState>>) -> ApiResult<Vec<SessionStatus>> {
    let mut out = Vec::new();
    for id in state.session_ids() {
        if let Some(h) = state.session(&id) {
            if let Ok(status) = h.status().await {
                out.push(status);
            }
        }
    }
    Ok(Json(out))
}

pub async fn create_session(
    State(state): State<Arc<AppState>>,
    body: axum::body::Bytes,
) -> Result<(StatusCode, Json<SessionStatus>), ApiError> {
    let story = parse_story(&body, state.base_dir()).map_err(|e| ApiError::story(&e))?;
    let handle = state.create_session(story);
    Ok((StatusCode::CREATED, Json(handle.status().await?)))
}

pub async fn session_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionStatus> {
    Ok(Json(lookup(&state, &id)?.status().await?))
}

pub async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if state.remove_session(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`")))
    }
}

pub async fn story_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StoryInfo> {
    Ok(Json(lookup(&state, &id)?.info().await?))
}

pub async fn scene_state(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SceneState> {
    Ok(Json(lookup(&state, &id)?.state().await?))
}

pub async fn get_story(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StoryScript> {
    Ok(Json(lookup(&state, &id)?.script().await?))
}

/// Planner save: replaces the story atomically and broadcasts to connected clients.
pub async fn put_story(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> ApiResult<StoryInfo> {
    let handle = lookup(&state, &id)?;
    let doc: Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_message", e.to_string()))?;
    match handle.update_story(doc).await? {
        Ok(info) => Ok(Json(info)),
        Err((code, detail)) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, &code, detail)),
    }
}
