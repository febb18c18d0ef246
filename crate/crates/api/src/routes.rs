use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, RawQuery, State};
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use tweetinfo_core::auth::SessionToken;
use tweetinfo_core::filter::{FilterQuery, MetaInfo, Page};
use tweetinfo_core::telemetry::{ClickEvent, Receipt};

use crate::error::ApiError;
use crate::AppState;

/// A request carrying a valid, unexpired bearer token.
pub struct Authenticated(pub SessionToken);

impl FromRequestParts<AppState> for Authenticated {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or_else(ApiError::unauthenticated)?;
        Ok(Authenticated(state.sessions.authenticate(token)?))
    }
}

#[derive(Deserialize)]
pub struct SignInRequest {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SignInResponse {
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

pub async fn sign_in(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<Json<SignInResponse>, ApiError> {
    let req: SignInRequest = serde_json::from_slice(&body)
        .map_err(|_| ApiError::malformed_request("expected {\"username\", \"password\"}"))?;
    let sessions = state.sessions.clone();
    // Password hashing is deliberately slow; keep it off the async workers.
    let session =
        tokio::task::spawn_blocking(move || sessions.sign_in(&req.username, &req.password))
            .await
            .map_err(|_| ApiError::internal())??;
    Ok(Json(SignInResponse {
        token: session.token,
        expires_at: session.expires_at,
    }))
}

/// Parses a raw query string into a validated [`FilterQuery`].
pub fn parse_timeline_query(raw: Option<&str>) -> Result<FilterQuery, ApiError> {
    let pairs: Vec<(String, String)> = form_urlencoded::parse(raw.unwrap_or("").as_bytes())
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    Ok(FilterQuery::from_params(
        pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())),
    )?)
}

pub async fn timeline(
    _auth: Authenticated,
    State(state): State<AppState>,
    RawQuery(raw): RawQuery,
) -> Result<Json<Page>, ApiError> {
    let query = parse_timeline_query(raw.as_deref())?;
    Ok(Json(state.corpus.query(&query)?))
}

pub async fn meta(
    _auth: Authenticated,
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<MetaInfo>, ApiError> {
    Ok(Json(state.corpus.get_meta(&id)?))
}

/// Click payload; the user is taken from the session, not the body.
#[derive(Debug, Deserialize)]
pub struct ClickIntake {
    pub session_id: String,
    pub target: String,
    #[serde(default)]
    pub tweet_id: Option<String>,
    pub client_timestamp: DateTime<Utc>,
    pub client_seq: u64,
}

pub async fn click(
    Authenticated(session): Authenticated,
    State(state): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let intake: ClickIntake = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "MALFORMED_EVENT",
            format!("invalid click event: {e}"),
        )
    })?;
    let event = ClickEvent {
        session_id: intake.session_id,
        user_id: session.user_id,
        target: intake.target,
        tweet_id: intake.tweet_id.filter(|t| !t.is_empty()),
        client_timestamp: intake.client_timestamp,
        client_seq: intake.client_seq,
    };
    event.validate()?;
    let events = state.events.clone();
    let receipt: Receipt = tokio::task::spawn_blocking(move || events.record(&event))
        .await
        .map_err(|_| ApiError::internal())??;
    Ok((StatusCode::ACCEPTED, Json(receipt)))
}

pub async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such endpoint")
}
