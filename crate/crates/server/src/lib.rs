//! Realtime session server. Presenters stream hand landmarks over `/ws`; every
//! connected client receives the resulting scene states. A small HTTP JSON API
//! manages sessions and stories, and `/` serves the browser bundle.

mod api;
mod hub;
mod ws;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::routing::{get, post};
use axum::Router;
use hanstream_core::session::{ClientId, Session, SessionConfig};
use hanstream_core::story::{parse_story, Story, StoryError};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

pub use hub::{Outbox, SessionGone, SessionHandle, OUTBOX_CAPACITY};

/// Id of the session created from the story given at startup.
pub const DEFAULT_SESSION: &str = "default";

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    pub story: PathBuf,
    /// Directory served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Trace file receiving every accepted message of the default session.
    pub record: Option<PathBuf>,
    pub session: SessionConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("{0}")]
    Story(#[from] StoryError),
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ServerError {
    /// True when the operator's input is at fault rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(self, ServerError::Story(_))
    }
}

/// Shared registry of live sessions.
#[derive(Debug)]
pub struct AppState {
    sessions: RwLock<BTreeMap<String, SessionHandle>>,
    /// Data paths in stories created over HTTP resolve against this directory.
    base_dir: PathBuf,
    session_config: SessionConfig,
    next_client: AtomicU64,
}

impl AppState {
    pub fn new(base_dir: PathBuf, session_config: SessionConfig) -> Self {
        AppState {
            sessions: RwLock::new(BTreeMap::new()),
            base_dir,
            session_config,
            next_client: AtomicU64::new(1),
        }
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn next_client_id(&self) -> ClientId {
        self.next_client.fetch_add(1, Ordering::Relaxed)
    }

    pub fn session(&self, id: &str) -> Option<SessionHandle> {
        let sessions = self.sessions.read().expect("session registry poisoned");
        sessions.get(id).filter(|h| !h.is_closed()).cloned()
    }

    pub fn session_ids(&self) -> Vec<String> {
        let sessions = self.sessions.read().expect("session registry poisoned");
        sessions.iter().filter(|(_, h)| !h.is_closed()).map(|(k, _)| k.clone()).collect()
    }

    /// Registers and starts a session under `id`, replacing any previous one.
    pub fn insert_session(&self, id: String, session: Session, record: Option<File>) -> SessionHandle {
        let handle = SessionHandle::spawn(id.clone(), session, record);
        let previous = self
            .sessions
            .write()
            .expect("session registry poisoned")
            .insert(id, handle.clone());
        if let Some(old) = previous {
            old.close();
        }
        handle
    }

    /// Starts a session for `story` under a fresh opaque id.
    pub fn create_session(&self, story: Story) -> SessionHandle {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.insert_session(id, Session::with_config(story, self.session_config), None)
    }

    pub fn remove_session(&self, id: &str) -> bool {
        let removed = self.sessions.write().expect("session registry poisoned").remove(id);
        match removed {
            Some(h) => {
                h.close();
                true
            }
            None => false,
        }
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/health", get(api::health))
        .route("/validate", post(api::validate))
        .route("/sessions", get(api::list_sessions).post(api::create_session))
        .route("/sessions/{id}", get(api::session_status).delete(api::delete_session))
        .route("/sessions/{id}/info", get(api::story_info))
        .route("/sessions/{id}/state", get(api::scene_state))
        .route("/sessions/{id}/story", get(api::get_story).put(api::put_story));
    let app = Router::new()
        .nest("/api", api)
        .route("/ws", get(ws::upgrade))
        .with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(api::index),
    }
}

/// Loads the startup story, registers the default session, and builds the router.
pub fn build(config: &ServerConfig) -> Result<(Router, Arc<AppState>), ServerError> {
    let bytes = std::fs::read(&config.story).map_err(|source| ServerError::Io {
        path: config.story.clone(),
        source,
    })?;
    let base_dir = config.story.parent().unwrap_or(Path::new(".")).to_path_buf();
    let story = parse_story(&bytes, &base_dir)?;
    let record = config
        .record
        .as_ref()
        .map(|path| {
            File::create(path).map_err(|source| ServerError::Io {
                path: path.clone(),
                source,
            })
        })
        .transpose()?;
    let state = Arc::new(AppState::new(base_dir, config.session));
    state.insert_session(DEFAULT_SESSION.to_string(), Session::with_config(story, config.session), record);
    Ok((router(state.clone(), config.static_dir.as_deref()), state))
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    config: ServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    let (app, _state) = build(&config)?;
    let addr = listener.local_addr().ok();
    tracing::info!(?addr, story = %config.story.display(), "serving");
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|source| ServerError::Io {
            path: PathBuf::from("<listener>"),
            source,
        })
}
