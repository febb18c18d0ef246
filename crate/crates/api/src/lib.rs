//! HTTP JSON API.
//!
//! | Method | Path                    | Auth   |
//! |--------|-------------------------|--------|
//! | POST   | `/api/session`          | none   |
//! | GET    | `/api/tweets`           | bearer |
//! | GET    | `/api/tweets/{id}/meta` | bearer |
//! | POST   | `/api/events/click`     | bearer |
//!
//! Anything outside `/api` is served from the configured static directory.

pub mod error;
pub mod routes;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use chrono::Duration;
use tower_http::services::{ServeDir, ServeFile};
use tower_http::trace::TraceLayer;

use tweetinfo_core::auth::SessionManager;
use tweetinfo_core::config::Config;
use tweetinfo_core::store::CorpusStore;
use tweetinfo_core::telemetry::{self, EventStore};

pub use error::{ApiError, ErrorBody, ERROR_CODES};

#[derive(Clone)]
pub struct AppState {
    pub corpus: Arc<CorpusStore>,
    pub events: Arc<dyn EventStore>,
    pub sessions: Arc<SessionManager>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] tweetinfo_core::config::ConfigError),
    #[error(transparent)]
    Store(#[from] tweetinfo_core::store::StoreError),
    #[error(transparent)]
    Telemetry(#[from] tweetinfo_core::telemetry::TelemetryError),
    #[error(transparent)]
    Auth(#[from] tweetinfo_core::auth::AuthError),
    #[error("invalid listen address `{0}`")]
    Listen(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AppState {
    pub fn from_config(config: &Config) -> Result<Self, ServeError> {
        let location = config.storage()?;
        let corpus = CorpusStore::open_location(&location)?;
        let events = telemetry::open_event_store(&location)?;
        let sessions = SessionManager::new(
            config.users.iter().cloned(),
            Duration::seconds(config.session_ttl_secs),
        )?;
        Ok(AppState {
            corpus: Arc::new(corpus),
            events: Arc::from(events),
            sessions: Arc::new(sessions),
        })
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/session", post(routes::sign_in))
        .route("/tweets", get(routes::timeline))
        .route("/tweets/{id}/meta", get(routes::meta))
        .route("/events/click", post(routes::click))
        .fallback(routes::api_not_found);
    Router::new()
        .nest("/api", api)
        .with_state(state)
        .layer(TraceLayer::new_for_http())
}

/// Adds the UI bundle as the fallback for non-API paths.
pub fn with_static(router: Router, dir: &std::path::Path) -> Router {
    let index = dir.join("index.html");
    router.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
}

pub async fn serve(config: Config) -> Result<(), ServeError> {
    let state = AppState::from_config(&config)?;
    serve_state(&config, state).await
}

/// Serves `state` on `config.listen` until Ctrl-C.
pub async fn serve_state(config: &Config, state: AppState) -> Result<(), ServeError> {
    let addr: SocketAddr = config
        .listen
        .parse()
        .map_err(|_| ServeError::Listen(config.listen.clone()))?;
    tracing::info!(records = state.corpus.len(), "corpus ready");
    let mut app = router(state);
    if let Some(dir) = &config.static_dir {
        app = with_static(app, dir);
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
