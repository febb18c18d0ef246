//! Service configuration: a TOML file whose scalar settings can be
//! overridden by `TWEETINFO_*` environment variables.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::auth::{UserRecord, DEFAULT_SESSION_TTL_SECS};
use crate::db::StorageLocation;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid setting `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotProviderKind {
    Offline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_ttl")]
    pub session_ttl_secs: i64,
    /// `memory` or `sqlite:<path>`.
    #[serde(default = "default_store")]
    pub store: String,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    #[serde(default = "default_provider")]
    pub bot_provider: BotProviderKind,
    /// `handle<TAB>score` fixture for the offline provider.
    #[serde(default)]
    pub bot_scores: Option<PathBuf>,
    #[serde(default)]
    pub users: Vec<UserRecord>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_ttl() -> i64 {
    DEFAULT_SESSION_TTL_SECS
}

fn default_store() -> String {
    "memory".into()
}

fn default_provider() -> BotProviderKind {
    BotProviderKind::Offline
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: default_listen(),
            session_ttl_secs: default_ttl(),
            store: default_store(),
            static_dir: None,
            bot_provider: default_provider(),
            bot_scores: None,
            users: Vec::new(),
        }
    }
}

pub const ENV_LISTEN: &str = "TWEETINFO_LISTEN";
pub const ENV_SESSION_TTL: &str = "TWEETINFO_SESSION_TTL_SECS";
pub const ENV_STORE: &str = "TWEETINFO_STORE";
pub const ENV_STATIC_DIR: &str = "TWEETINFO_STATIC_DIR";
pub const ENV_BOT_PROVIDER: &str = "TWEETINFO_BOT_PROVIDER";

impl Config {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let mut config: Config = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        // Relative paths in a config file are relative to that file.
        if let Some(base) = origin.parent() {
            config.static_dir = config.static_dir.map(|p| base.join(p));
            config.bot_scores = config.bot_scores.map(|p| base.join(p));
            if let Ok(StorageLocation::Sqlite(p)) = config.store.parse::<StorageLocation>() {
                if p.is_relative() {
                    config.store = StorageLocation::Sqlite(base.join(p)).to_string();
                }
            }
        }
        config.check()?;
        Ok(config)
    }

    /// Reads `path` (when given), then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Config::from_toml(&text, p)?
            }
            None => Config::default(),
        };
        config.apply_overrides(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_overrides(
        &mut self,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<(), ConfigError> {
        if let Some(v) = lookup(ENV_LISTEN) {
            self.listen = v;
        }
        if let Some(v) = lookup(ENV_SESSION_TTL) {
            self.session_ttl_secs = v.trim().parse().map_err(|_| ConfigError::Invalid {
                key: ENV_SESSION_TTL.into(),
                reason: format!("`{v}` is not an integer"),
            })?;
        }
        if let Some(v) = lookup(ENV_STORE) {
            self.store = v;
        }
        if let Some(v) = lookup(ENV_STATIC_DIR) {
            self.static_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = lookup(ENV_BOT_PROVIDER) {
            self.bot_provider = match v.trim() {
                "offline" => BotProviderKind::Offline,
                "remote" => BotProviderKind::Remote,
                other => {
                    return Err(ConfigError::Invalid {
                        key: ENV_BOT_PROVIDER.into(),
                        reason: format!("`{other}` is not offline or remote"),
                    })
                }
            };
        }
        self.check()
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.session_ttl_secs <= 0 {
            return Err(ConfigError::Invalid {
                key: "session_ttl_secs".into(),
                reason: "must be positive".into(),
            });
        }
        self.storage().map(|_| ())
    }

    pub fn storage(&self) -> Result<StorageLocation, ConfigError> {
        self.store.parse().map_err(|reason| ConfigError::Invalid {
            key: "store".into(),
            reason,
        })
    }
}
