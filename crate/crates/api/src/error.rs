use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use tweetinfo_core::auth::AuthError;
use tweetinfo_core::filter::FilterError;
use tweetinfo_core::store::StoreError;
use tweetinfo_core::telemetry::TelemetryError;

/// Every code the API can return.
pub const ERROR_CODES: &[&str] = &[
    "INVALID_CREDENTIALS",
    "UNAUTHENTICATED",
    "MUTUALLY_EXCLUSIVE_FILTERS",
    "INVALID_FILTER_VALUE",
    "INVALID_PAGINATION",
    "NOT_FOUND",
    "MALFORMED_EVENT",
    "MALFORMED_REQUEST",
    "STORAGE_FAILURE",
    "INTERNAL",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(
            ERROR_CODES.contains(&code),
            "unregistered error code {code}"
        );
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn unauthenticated() -> Self {
        ApiError::new(
            StatusCode::UNAUTHORIZED,
            "UNAUTHENTICATED",
            "a valid bearer token is required",
        )
    }

    pub fn malformed_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "MALFORMED_REQUEST", message)
    }

    pub fn internal() -> Self {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "INTERNAL",
            "internal server error",
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code,
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<FilterError> for ApiError {
    fn from(e: FilterError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string())
    }
}

impl From<AuthError> for ApiError {
    fn from(e: AuthError) -> Self {
        match e {
            AuthError::InvalidCredentials => ApiError::new(
                StatusCode::UNAUTHORIZED,
                "INVALID_CREDENTIALS",
                "invalid username or password",
            ),
            AuthError::Unauthenticated => ApiError::unauthenticated(),
            AuthError::BadHash(_) => ApiError::internal(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => ApiError::new(
                StatusCode::NOT_FOUND,
                "NOT_FOUND",
                format!("no tweet with id `{id}`"),
            ),
            other => {
                tracing::error!(error = %other, "store failure");
                ApiError::new(
                    StatusCode::SERVICE_UNAVAILABLE,
                    "STORAGE_FAILURE",
                    "storage is unavailable; retry later",
                )
            }
        }
    }
}

impl From<TelemetryError> for ApiError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::MalformedEvent(m) => {
                ApiError::new(StatusCode::BAD_REQUEST, "MALFORMED_EVENT", m)
            }
            other => {
                tracing::error!(error = %other, "telemetry failure");
                ApiError::new(
                    StatusCode::SERVICE_UNAVAILABLE,
                    "STORAGE_FAILURE",
                    "event storage is unavailable; retry later",
                )
            }
        }
    }
}
