//! Append-only, idempotent click telemetry.
//!
//! `(session_id, client_seq)` identifies an event. Submitting the same pair
//! again returns the receipt issued the first time and stores nothing.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::sync::{Mutex, PoisonError};

use chrono::{DateTime, SecondsFormat, Utc};
use rusqlite::{params, Connection, OptionalExtension};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::db::{self, StorageLocation};

#[derive(Debug, thiserror::Error)]
pub enum TelemetryError {
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("invalid range: from {from} is after to {to}")]
    InvalidRange {
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    },
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl TelemetryError {
    pub fn code(&self) -> &'static str {
        match self {
            TelemetryError::MalformedEvent(_) => "MALFORMED_EVENT",
            TelemetryError::InvalidRange { .. } => "INVALID_RANGE",
            TelemetryError::StorageFailure(_) | TelemetryError::Io(_) => "STORAGE_FAILURE",
        }
    }
}

impl From<rusqlite::Error> for TelemetryError {
    fn from(e: rusqlite::Error) -> Self {
        TelemetryError::StorageFailure(e.to_string())
    }
}

/// A click as submitted by a client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickEvent {
    pub session_id: String,
    pub user_id: String,
    /// UI element, e.g. `meta_button`, `search_button`, `filter_checkbox:hate`.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tweet_id: Option<String>,
    pub client_timestamp: DateTime<Utc>,
    pub client_seq: u64,
}

impl ClickEvent {
    pub fn validate(&self) -> Result<(), TelemetryError> {
        let malformed = |m: &str| Err(TelemetryError::MalformedEvent(m.to_string()));
        if self.session_id.trim().is_empty() {
            return malformed("session_id is empty");
        }
        if self.user_id.trim().is_empty() {
            return malformed("user_id is empty");
        }
        if self.target.trim().is_empty() {
            return malformed("target is empty");
        }
        if i64::try_from(self.client_seq).is_err() {
            return malformed("client_seq exceeds 2^63 - 1");
        }
        if self.client_timestamp.timestamp_nanos_opt().is_none() {
            return malformed("client_timestamp out of representable range");
        }
        Ok(())
    }

    fn ts_nanos(&self) -> i64 {
        self.client_timestamp
            .timestamp_nanos_opt()
            .expect("validated timestamp")
    }
}

/// A stored event with its server-assigned receipt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedClick {
    pub receipt_id: String,
    #[serde(flatten)]
    pub event: ClickEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Receipt {
    pub receipt_id: String,
    /// True when the event had already been recorded.
    pub duplicate: bool,
}

pub trait EventStore: Send + Sync {
    /// Stores the event unless its idempotency key is already present.
    fn record(&self, event: &ClickEvent) -> Result<Receipt, TelemetryError>;
    /// Stores a previously exported event under its original receipt.
    /// Returns false when the key was already present.
    fn import(&self, event: &RecordedClick) -> Result<bool, TelemetryError>;
    /// Events with `from <= client_timestamp < to`, ordered by
    /// `(client_timestamp, receipt_id)`.
    fn range(
        &self,
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    ) -> Result<Vec<RecordedClick>, TelemetryError>;
    fn count(&self) -> Result<usize, TelemetryError>;
}

pub fn new_receipt_id() -> String {
    Uuid::new_v4().to_string()
}

#[derive(Debug, Default)]
struct MemoryEvents {
    rows: Vec<RecordedClick>,
    by_key: HashMap<(String, u64), usize>,
}

#[derive(Debug, Default)]
pub struct MemoryEventStore {
    inner: Mutex<MemoryEvents>,
}

impl MemoryEventStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn insert(&self, row: RecordedClick) -> Result<Receipt, TelemetryError> {
        row.event.validate()?;
        let mut inner = self.inner.lock().unwrap_or_else(PoisonError::into_inner);
        let key = (row.event.session_id.clone(), row.event.client_seq);
        if let Some(&i) = inner.by_key.get(&key) {
            return Ok(Receipt {
                receipt_id: inner.rows[i].receipt_id.clone(),
                duplicate: true,
            });
        }
        let receipt_id = row.receipt_id.clone();
        let idx = inner.rows.len();
        inner.rows.push(row);
        inner.by_key.insert(key, idx);
        Ok(Receipt {
            receipt_id,
            duplicate: false,
        })
    }
}

impl EventStore for MemoryEventStore {
    fn record(&self, event: &ClickEvent) -> Result<Receipt, TelemetryError> {
        self.insert(RecordedClick {
            receipt_id: new_receipt_id(),
            event: event.clone(),
        })
    }

    fn import(&self, event: &RecordedClick) -> Result<bool, TelemetryError> {
        Ok(!self.insert(event.clone())?.duplicate)
    }

    fn range(
        &self,
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    ) -> Result<Vec<RecordedClick>, TelemetryError> {
        let inner = self.inner.lock().unwrap_or_else(PoisonError::into_inner);
        let mut out: Vec<RecordedClick> = inner
            .rows
            .iter()
            .filter(|r| r.event.client_timestamp >= from && r.event.client_timestamp < to)
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            (a.event.client_timestamp, &a.receipt_id)
                .cmp(&(b.event.client_timestamp, &b.receipt_id))
        });
        Ok(out)
    }

    fn count(&self) -> Result<usize, TelemetryError> {
        Ok(self
            .inner
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .rows
            .len())
    }
}

pub struct SqliteEventStore {
    conn: Mutex<Connection>,
}

impl SqliteEventStore {
    pub fn new(conn: Connection) -> Self {
        SqliteEventStore {
            conn: Mutex::new(conn),
        }
    }

    fn insert(&self, row: &RecordedClick) -> Result<Receipt, TelemetryError> {
        let e = &row.event;
        e.validate()?;
        let conn = self.conn.lock().unwrap_or_else(PoisonError::into_inner);
        let inserted = conn.execute(
            "INSERT OR IGNORE INTO click_events
                 (receipt_id, session_id, user_id, target, tweet_id, client_timestamp, ts_nanos, client_seq)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            params![
                row.receipt_id,
                e.session_id,
                e.user_id,
                e.target,
                e.tweet_id,
                e.client_timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
                e.ts_nanos(),
                e.client_seq as i64,
            ],
        )?;
        if inserted == 1 {
            return Ok(Receipt {
                receipt_id: row.receipt_id.clone(),
                duplicate: false,
            });
        }
        let existing: Option<String> = conn
            .query_row(
                "SELECT receipt_id FROM click_events WHERE session_id = ?1 AND client_seq = ?2",
                params![e.session_id, e.client_seq as i64],
                |r| r.get(0),
            )
            .optional()?;
        match existing {
            Some(receipt_id) => Ok(Receipt {
                receipt_id,
                duplicate: true,
            }),
            // The only other constraint is the receipt primary key.
            None => Err(TelemetryError::StorageFailure(format!(
                "receipt id `{}` already used by another event",
                row.receipt_id
            ))),
        }
    }
}

impl EventStore for SqliteEventStore {
    fn record(&self, event: &ClickEvent) -> Result<Receipt, TelemetryError> {
        self.insert(&RecordedClick {
            receipt_id: new_receipt_id(),
            event: event.clone(),
        })
    }

    fn import(&self, event: &RecordedClick) -> Result<bool, TelemetryError> {
        Ok(!self.insert(event)?.duplicate)
    }

    fn range(
        &self,
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    ) -> Result<Vec<RecordedClick>, TelemetryError> {
        // Bounds outside the nanosecond range clamp to the extremes.
        let lo = from
            .timestamp_nanos_opt()
            .unwrap_or(if from.timestamp() < 0 {
                i64::MIN
            } else {
                i64::MAX
            });
        let hi = to.timestamp_nanos_opt().unwrap_or(if to.timestamp() < 0 {
            i64::MIN
        } else {
            i64::MAX
        });
        let conn = self.conn.lock().unwrap_or_else(PoisonError::into_inner);
        let mut stmt = conn.prepare(
            "SELECT receipt_id, session_id, user_id, target, tweet_id, ts_nanos, client_seq
             FROM click_events WHERE ts_nanos >= ?1 AND ts_nanos < ?2
             ORDER BY ts_nanos, receipt_id",
        )?;
        let rows = stmt.query_map(params![lo, hi], |r| {
            Ok(RecordedClick {
                receipt_id: r.get(0)?,
                event: ClickEvent {
                    session_id: r.get(1)?,
                    user_id: r.get(2)?,
                    target: r.get(3)?,
                    tweet_id: r.get(4)?,
                    client_timestamp: DateTime::from_timestamp_nanos(r.get(5)?),
                    client_seq: r.get::<_, i64>(6)? as u64,
                },
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    fn count(&self) -> Result<usize, TelemetryError> {
        let conn = self.conn.lock().unwrap_or_else(PoisonError::into_inner);
        Ok(conn.query_row("SELECT COUNT(*) FROM click_events", [], |r| r.get(0))?)
    }
}

pub fn open_event_store(location: &StorageLocation) -> Result<Box<dyn EventStore>, TelemetryError> {
    Ok(match location {
        StorageLocation::Memory => Box::new(MemoryEventStore::new()),
        StorageLocation::Sqlite(path) => Box::new(SqliteEventStore::new(db::open_sqlite(path)?)),
    })
}

/// Writes events in `[from, to)` as JSONL; returns how many were written.
pub fn export_events<W: Write>(
    store: &dyn EventStore,
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    mut out: W,
) -> Result<usize, TelemetryError> {
    if from > to {
        return Err(TelemetryError::InvalidRange { from, to });
    }
    let events = store.range(from, to)?;
    for e in &events {
        serde_json::to_writer(&mut out, e).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(events.len())
}

/// Re-imports an export; returns the number of newly stored events.
pub fn import_events<R: BufRead>(
    store: &dyn EventStore,
    input: R,
) -> Result<usize, TelemetryError> {
    let mut added = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: RecordedClick = serde_json::from_str(&line)
            .map_err(|e| TelemetryError::MalformedEvent(format!("line {}: {e}", i + 1)))?;
        added += usize::from(store.import(&event)?);
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::sync::Arc;

    fn event(session: &str, seq: u64, secs: i64) -> ClickEvent {
        ClickEvent {
            session_id: session.into(),
            user_id: "u1".into(),
            target: "meta_button".into(),
            tweet_id: Some("hate:1".into()),
            client_timestamp: Utc
                .timestamp_opt(1_700_000_000 + secs, 123_456_789)
                .unwrap(),
            client_seq: seq,
        }
    }

    fn stores() -> Vec<Box<dyn EventStore>> {
        vec![
            Box::new(MemoryEventStore::new()),
            Box::new(SqliteEventStore::new(db::open_sqlite_in_memory().unwrap())),
        ]
    }

    fn all(store: &dyn EventStore) -> Vec<RecordedClick> {
        store
            .range(DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC)
            .unwrap()
    }

    #[test]
    fn record_is_idempotent() {
        for store in stores() {
            let first = store.record(&event("s", 1, 0)).unwrap();
            assert!(!first.duplicate);
            let again = store.record(&event("s", 1, 5)).unwrap();
            assert!(again.duplicate);
            assert_eq!(again.receipt_id, first.receipt_id);
            assert_eq!(store.count().unwrap(), 1);
            store.record(&event("s", 2, 0)).unwrap();
            store.record(&event("t", 1, 0)).unwrap();
            assert_eq!(store.count().unwrap(), 3);
        }
    }

    #[test]
    fn malformed_events_are_rejected() {
        for store in stores() {
            let mut e = event("s", 1, 0);
            e.target = " ".into();
            assert_eq!(store.record(&e).unwrap_err().code(), "MALFORMED_EVENT");
            let mut e = event("s", 1, 0);
            e.client_seq = u64::MAX;
            assert_eq!(store.record(&e).unwrap_err().code(), "MALFORMED_EVENT");
            assert_eq!(store.count().unwrap(), 0);
        }
    }

    #[test]
    fn range_is_half_open_and_ordered() {
        for store in stores() {
            for (i, secs) in [30, 10, 20, 10].into_iter().enumerate() {
                store.record(&event("s", i as u64, secs)).unwrap();
            }
            let t = |s: i64| Utc.timestamp_opt(1_700_000_000 + s, 123_456_789).unwrap();
            let got = store.range(t(10), t(30)).unwrap();
            assert_eq!(got.len(), 3);
            assert!(got.windows(2).all(|w| {
                (w[0].event.client_timestamp, &w[0].receipt_id)
                    <= (w[1].event.client_timestamp, &w[1].receipt_id)
            }));
            assert!(store.range(t(10), t(10)).unwrap().is_empty());
        }
    }

    #[test]
    fn export_rejects_inverted_range() {
        let store = MemoryEventStore::new();
        let now = Utc::now();
        let err =
            export_events(&store, now, now - chrono::Duration::seconds(1), Vec::new()).unwrap_err();
        assert_eq!(err.code(), "INVALID_RANGE");
        let mut buf = Vec::new();
        assert_eq!(export_events(&store, now, now, &mut buf).unwrap(), 0);
        assert!(buf.is_empty());
    }

    #[test]
    fn export_then_import_round_trips() {
        for store in stores() {
            for i in 0..25 {
                store
                    .record(&event(&format!("s{}", i % 3), i, i as i64))
                    .unwrap();
            }
            let mut buf = Vec::new();
            let n = export_events(
                store.as_ref(),
                DateTime::<Utc>::MIN_UTC,
                DateTime::<Utc>::MAX_UTC,
                &mut buf,
            )
            .unwrap();
            assert_eq!(n, 25);
            for fresh in stores() {
                assert_eq!(import_events(fresh.as_ref(), buf.as_slice()).unwrap(), 25);
                assert_eq!(all(fresh.as_ref()), all(store.as_ref()));
                assert_eq!(import_events(fresh.as_ref(), buf.as_slice()).unwrap(), 0);
            }
        }
    }

    #[test]
    fn concurrent_submitters_lose_nothing() {
        let stores: Vec<Arc<dyn EventStore>> = vec![
            Arc::new(MemoryEventStore::new()),
            Arc::new(SqliteEventStore::new(db::open_sqlite_in_memory().unwrap())),
        ];
        for store in stores {
            let handles: Vec<_> = (0..4)
                .map(|w| {
                    let store = store.clone();
                    std::thread::spawn(move || {
                        for i in 0..25 {
                            store.record(&event(&format!("w{w}"), i, i as i64)).unwrap();
                        }
                    })
                })
                .collect();
            for h in handles {
                h.join().unwrap();
            }
            assert_eq!(store.count().unwrap(), 100);
        }
    }

    #[test]
    fn sqlite_store_is_durable() {
        let dir = tempfile::tempdir().unwrap();
        let loc = StorageLocation::Sqlite(dir.path().join("events.db"));
        let receipt = open_event_store(&loc)
            .unwrap()
            .record(&event("s", 1, 0))
            .unwrap();
        let reopened = open_event_store(&loc).unwrap();
        assert_eq!(reopened.count().unwrap(), 1);
        assert_eq!(
            reopened.record(&event("s", 1, 0)).unwrap().receipt_id,
            receipt.receipt_id
        );
    }
}
