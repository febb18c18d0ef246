#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use tweetinfo_api::{router, AppState};
use tweetinfo_core::auth::{hash_password, SessionManager, UserRecord};
use tweetinfo_core::pipeline::bundled_corpus;
use tweetinfo_core::telemetry::{EventStore, MemoryEventStore};
use tweetinfo_core::{Corpus, CorpusStore};

pub const USER: &str = "analyst";
pub const PASSWORD: &str = "correct horse battery staple";

pub fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| bundled_corpus().unwrap().0)
}

fn user() -> UserRecord {
    static HASH: OnceLock<String> = OnceLock::new();
    UserRecord {
        username: USER.into(),
        user_id: Some("u-analyst".into()),
        password_hash: HASH.get_or_init(|| hash_password(PASSWORD)).clone(),
    }
}

pub fn state_with(events: Arc<dyn EventStore>) -> AppState {
    let store = CorpusStore::in_memory();
    store.bulk_load(corpus()).unwrap();
    AppState {
        corpus: Arc::new(store),
        events,
        sessions: Arc::new(SessionManager::new([user()], chrono::Duration::hours(24)).unwrap()),
    }
}

pub fn app() -> Router {
    router(state_with(Arc::new(MemoryEventStore::new())))
}

pub async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, json)
}

pub async fn sign_in(app: &Router) -> String {
    let (status, body) = call(
        app,
        "POST",
        "/api/session",
        None,
        Some(serde_json::json!({"username": USER, "password": PASSWORD})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["token"].as_str().unwrap().to_owned()
}
