//! Seeded users and bearer-token sessions.

use std::collections::HashMap;
use std::sync::{PoisonError, RwLock};

use argon2::password_hash::rand_core::OsRng;
use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SESSION_TTL_SECS: i64 = 24 * 60 * 60;
const TOKEN_BYTES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuthError {
    #[error("invalid username or password")]
    InvalidCredentials,
    #[error("missing, unknown or expired session token")]
    Unauthenticated,
    #[error("invalid password hash for user `{0}`")]
    BadHash(String),
}

impl AuthError {
    pub fn code(&self) -> &'static str {
        match self {
            AuthError::InvalidCredentials => "INVALID_CREDENTIALS",
            AuthError::Unauthenticated => "UNAUTHENTICATED",
            AuthError::BadHash(_) => "INTERNAL",
        }
    }
}

/// A configured account. `password_hash` is an argon2 PHC string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub username: String,
    #[serde(default)]
    pub user_id: Option<String>,
    pub password_hash: String,
}

impl UserRecord {
    pub fn user_id(&self) -> &str {
        self.user_id.as_deref().unwrap_or(&self.username)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionToken {
    pub token: String,
    pub user_id: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

impl SessionToken {
    pub fn is_valid_at(&self, now: DateTime<Utc>) -> bool {
        now < self.expires_at
    }
}

/// Salted argon2id hash in PHC format.
pub fn hash_password(password: &str) -> String {
    let salt = SaltString::generate(&mut OsRng);
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .expect("argon2 hashing with default params cannot fail")
        .to_string()
}

fn verify_password(password: &str, phc: &str) -> bool {
    PasswordHash::new(phc)
        .map(|h| {
            Argon2::default()
                .verify_password(password.as_bytes(), &h)
                .is_ok()
        })
        .unwrap_or(false)
}

fn new_token() -> String {
    let mut bytes = [0u8; TOKEN_BYTES];
    rand::rngs::OsRng.fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

pub struct SessionManager {
    users: HashMap<String, UserRecord>,
    sessions: RwLock<HashMap<String, SessionToken>>,
    ttl: Duration,
    // Verified against for unknown usernames so both failure paths cost the same.
    decoy_hash: String,
}

impl SessionManager {
    pub fn new(
        users: impl IntoIterator<Item = UserRecord>,
        ttl: Duration,
    ) -> Result<Self, AuthError> {
        let users: HashMap<_, _> = users.into_iter().map(|u| (u.username.clone(), u)).collect();
        for u in users.values() {
            PasswordHash::new(&u.password_hash)
                .map_err(|_| AuthError::BadHash(u.username.clone()))?;
        }
        Ok(SessionManager {
            users,
            sessions: RwLock::new(HashMap::new()),
            ttl,
            decoy_hash: hash_password("decoy password"),
        })
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn sign_in(&self, username: &str, password: &str) -> Result<SessionToken, AuthError> {
        self.sign_in_at(username, password, Utc::now())
    }

    pub fn sign_in_at(
        &self,
        username: &str,
        password: &str,
        now: DateTime<Utc>,
    ) -> Result<SessionToken, AuthError> {
        let user = self.users.get(username);
        let hash = user.map_or(self.decoy_hash.as_str(), |u| u.password_hash.as_str());
        let ok = verify_password(password, hash);
        let user = match user {
            Some(u) if ok => u,
            _ => return Err(AuthError::InvalidCredentials),
        };
        let session = SessionToken {
            token: new_token(),
            user_id: user.user_id().to_string(),
            issued_at: now,
            expires_at: now + self.ttl,
        };
        let mut sessions = self
            .sessions
            .write()
            .unwrap_or_else(PoisonError::into_inner);
        sessions.retain(|_, s| s.is_valid_at(now));
        sessions.insert(session.token.clone(), session.clone());
        Ok(session)
    }

    pub fn authenticate(&self, token: &str) -> Result<SessionToken, AuthError> {
        self.authenticate_at(token, Utc::now())
    }

    pub fn authenticate_at(
        &self,
        token: &str,
        now: DateTime<Utc>,
    ) -> Result<SessionToken, AuthError> {
        let sessions = self.sessions.read().unwrap_or_else(PoisonError::into_inner);
        match sessions.get(token) {
            Some(s) if s.is_valid_at(now) => Ok(s.clone()),
            _ => Err(AuthError::Unauthenticated),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manager() -> SessionManager {
        let users = [UserRecord {
            username: "demo".into(),
            user_id: Some("u-demo".into()),
            password_hash: hash_password("correct horse"),
        }];
        SessionManager::new(users, Duration::seconds(DEFAULT_SESSION_TTL_SECS)).unwrap()
    }

    #[test]
    fn sign_in_issues_24h_token() {
        let m = manager();
        let s = m.sign_in("demo", "correct horse").unwrap();
        assert_eq!(s.expires_at - s.issued_at, Duration::hours(24));
        assert_eq!(s.user_id, "u-demo");
        assert!(s.token.len() >= 43);
        assert!(s
            .token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'));
        assert_eq!(m.authenticate(&s.token).unwrap(), s);
    }

    #[test]
    fn wrong_password_and_unknown_user_look_the_same() {
        let m = manager();
        let a = m.sign_in("demo", "nope").unwrap_err();
        let b = m.sign_in("ghost", "correct horse").unwrap_err();
        assert_eq!(a, AuthError::InvalidCredentials);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn tokens_are_unique_and_expire() {
        let m = manager();
        let now = Utc::now();
        let a = m.sign_in_at("demo", "correct horse", now).unwrap();
        let b = m.sign_in_at("demo", "correct horse", now).unwrap();
        assert_ne!(a.token, b.token);
        assert!(m
            .authenticate_at(&a.token, now + Duration::hours(23))
            .is_ok());
        assert_eq!(
            m.authenticate_at(&a.token, now + Duration::hours(24))
                .unwrap_err(),
            AuthError::Unauthenticated
        );
        assert!(m.authenticate("not-a-token").is_err());
    }

    #[test]
    fn rejects_bad_configured_hash() {
        let users = [UserRecord {
            username: "x".into(),
            user_id: None,
            password_hash: "plaintext".into(),
        }];
        assert!(SessionManager::new(users, Duration::hours(1)).is_err());
    }
}
