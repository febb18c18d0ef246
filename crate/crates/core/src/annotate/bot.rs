//! Bot likelihood providers.
//!
//! The offline provider reads a fixture of `handle<TAB>score` lines and is
//! fully deterministic. The remote provider queries an HTTP scoring service:
//!
//! ```text
//! GET <endpoint>?handle=<account handle>
//! Authorization: Bearer <token>
//!
//! 200 {"score": 0.73}
//! ```

use std::collections::HashMap;
use std::io::BufRead;
use std::time::Duration;

use serde::Deserialize;

use crate::model::{BotStatus, BOT_THRESHOLD};

pub const ENDPOINT_ENV: &str = "TWEETINFO_BOT_ENDPOINT";
pub const TOKEN_ENV: &str = "TWEETINFO_BOT_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum BotProviderError {
    #[error("PROVIDER_UNAVAILABLE: {0}")]
    Unavailable(String),
    #[error("bot score fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait BotProvider: Send + Sync {
    /// Raw score for an account. Callers clamp the result to [0, 1].
    fn score(&self, handle: &str) -> Result<f64, BotProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BotAssessment {
    pub bot_score: f64,
    pub is_bot: bool,
    pub status: BotStatus,
}

impl BotAssessment {
    pub fn unscored() -> Self {
        BotAssessment {
            bot_score: 0.0,
            is_bot: false,
            status: BotStatus::Unscored,
        }
    }
}

/// Scores one account; provider failures degrade to an unscored result.
pub fn score_bot(handle: &str, provider: &dyn BotProvider) -> BotAssessment {
    if handle.trim().is_empty() {
        return BotAssessment::unscored();
    }
    match provider.score(handle) {
        Ok(s) if !s.is_nan() => {
            let bot_score = s.clamp(0.0, 1.0);
            BotAssessment {
                bot_score,
                is_bot: bot_score >= BOT_THRESHOLD,
                status: BotStatus::Provider,
            }
        }
        Ok(_) => BotAssessment::unscored(),
        Err(e) => {
            tracing::warn!(handle, error = %e, "bot provider failed; record left unscored");
            BotAssessment::unscored()
        }
    }
}

/// Fixture-backed provider. Handles missing from the fixture score `default`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OfflineBotProvider {
    scores: HashMap<String, f64>,
    default: f64,
}

impl OfflineBotProvider {
    pub fn new(scores: HashMap<String, f64>) -> Self {
        OfflineBotProvider {
            scores: scores
                .into_iter()
                .map(|(k, v)| (normalize_handle(&k), v))
                .collect(),
            default: 0.0,
        }
    }

    pub fn with_default(mut self, default: f64) -> Self {
        self.default = default;
        self
    }

    pub fn parse<R: BufRead>(input: R) -> Result<Self, BotProviderError> {
        let mut scores = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fixture_err = |reason: String| BotProviderError::Fixture {
                line: i + 1,
                reason,
            };
            let (handle, score) = line
                .split_once('\t')
                .ok_or_else(|| fixture_err("expected handle<TAB>score".into()))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|e| fixture_err(format!("bad score: {e}")))?;
            scores.insert(handle.trim().to_string(), score);
        }
        Ok(OfflineBotProvider::new(scores))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn normalize_handle(handle: &str) -> String {
    handle.trim().trim_start_matches('@').to_ascii_lowercase()
}

impl BotProvider for OfflineBotProvider {
    fn score(&self, handle: &str) -> Result<f64, BotProviderError> {
        Ok(self
            .scores
            .get(&normalize_handle(handle))
            .copied()
            .unwrap_or(self.default))
    }
}

#[derive(Deserialize)]
struct RemoteScore {
    score: f64,
}

/// HTTP client for a remote scoring service. Safe for concurrent use.
#[derive(Debug, Clone)]
pub struct RemoteBotProvider {
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteBotProvider {
    pub fn new(
        endpoint: impl Into<String>,
        token: Option<String>,
    ) -> Result<Self, BotProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .map_err(|e| BotProviderError::Unavailable(e.to_string()))?;
        Ok(RemoteBotProvider {
            endpoint: endpoint.into(),
            token,
            client,
        })
    }

    /// Builds a client from `TWEETINFO_BOT_ENDPOINT` and `TWEETINFO_BOT_TOKEN`.
    pub fn from_env() -> Result<Self, BotProviderError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| BotProviderError::Unavailable(format!("{ENDPOINT_ENV} is not set")))?;
        RemoteBotProvider::new(endpoint, std::env::var(TOKEN_ENV).ok())
    }
}

impl BotProvider for RemoteBotProvider {
    fn score(&self, handle: &str) -> Result<f64, BotProviderError> {
        let unavailable = |e: reqwest::Error| BotProviderError::Unavailable(e.to_string());
        let mut req = self.client.get(&self.endpoint).query(&[("handle", handle)]);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let body: RemoteScore = req
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(unavailable)?;
        Ok(body.score)
    }
}
