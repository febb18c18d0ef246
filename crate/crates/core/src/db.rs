//! Storage locations and SQLite schema migrations.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rusqlite::Connection;

/// Ordered schema migrations; `PRAGMA user_version` records how many ran.
const MIGRATIONS: &[(&str, &str)] = &[
    (
        "0001_create_tweets",
        include_str!("../migrations/0001_create_tweets.sql"),
    ),
    (
        "0002_create_click_events",
        include_str!("../migrations/0002_create_click_events.sql"),
    ),
];

/// Where the corpus and telemetry live.
///
/// Parsed from `memory` or `sqlite:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StorageLocation {
    Memory,
    Sqlite(PathBuf),
}

impl FromStr for StorageLocation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "memory" {
            return Ok(StorageLocation::Memory);
        }
        match s
            .strip_prefix("sqlite://")
            .or_else(|| s.strip_prefix("sqlite:"))
        {
            Some(path) if !path.is_empty() => Ok(StorageLocation::Sqlite(PathBuf::from(path))),
            _ => Err(format!(
                "unsupported store `{s}` (expected `memory` or `sqlite:<path>`)"
            )),
        }
    }
}

impl fmt::Display for StorageLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StorageLocation::Memory => f.write_str("memory"),
            StorageLocation::Sqlite(p) => write!(f, "sqlite:{}", p.display()),
        }
    }
}

/// Opens (creating if needed) a database and applies pending migrations.
pub fn open_sqlite(path: &Path) -> rusqlite::Result<Connection> {
    let conn = Connection::open(path)?;
    prepare(conn)
}

pub fn open_sqlite_in_memory() -> rusqlite::Result<Connection> {
    prepare(Connection::open_in_memory()?)
}

fn prepare(mut conn: Connection) -> rusqlite::Result<Connection> {
    conn.busy_timeout(std::time::Duration::from_secs(5))?;
    conn.pragma_update_and_check(None, "journal_mode", "WAL", |_| Ok(()))?;
    migrate(&mut conn)?;
    Ok(conn)
}

pub fn migrate(conn: &mut Connection) -> rusqlite::Result<usize> {
    let current: usize = conn.query_row("PRAGMA user_version", [], |r| r.get(0))?;
    let tx = conn.transaction()?;
    for (i, (name, sql)) in MIGRATIONS.iter().enumerate().skip(current) {
        tracing::debug!(migration = name, "applying schema migration");
        tx.execute_batch(sql)?;
        tx.pragma_update(None, "user_version", i + 1)?;
    }
    tx.commit()?;
    Ok(MIGRATIONS.len() - current.min(MIGRATIONS.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_locations() {
        assert_eq!(
            "memory".parse::<StorageLocation>().unwrap(),
            StorageLocation::Memory
        );
        assert_eq!(
            "sqlite:data/t.db".parse::<StorageLocation>().unwrap(),
            StorageLocation::Sqlite("data/t.db".into())
        );
        assert_eq!(
            "sqlite:///tmp/t.db".parse::<StorageLocation>().unwrap(),
            StorageLocation::Sqlite("/tmp/t.db".into())
        );
        assert!("postgres://x".parse::<StorageLocation>().is_err());
        assert!("sqlite:".parse::<StorageLocation>().is_err());
    }

    #[test]
    fn migrations_apply_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.db");
        let mut conn = open_sqlite(&path).unwrap();
        assert_eq!(migrate(&mut conn).unwrap(), 0);
        let version: usize = conn
            .query_row("PRAGMA user_version", [], |r| r.get(0))
            .unwrap();
        assert_eq!(version, MIGRATIONS.len());
    }
}
