//! The queryable corpus.
//!
//! Records are persisted through a [`CorpusBackend`]; queries run against an
//! immutable in-memory snapshot carrying a bitset per filterable attribute
//! value. A bulk load builds a fresh snapshot and swaps it in atomically, so
//! readers see either the old corpus or the new one.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use rusqlite::{params, Connection};
use serde::Serialize;

use crate::db::{self, StorageLocation};
use crate::filter::{FilterError, FilterQuery, MetaInfo, Page, TriState};
use crate::model::{Category, Corpus, InvariantViolation, Language, SentimentLabel, TweetRecord};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no tweet with id `{0}`")]
    NotFound(String),
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error("invalid corpus: {0}")]
    InvalidCorpus(#[from] InvariantViolation),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::NotFound(_) => "NOT_FOUND",
            StoreError::StorageFailure(_) => "STORAGE_FAILURE",
            StoreError::InvalidCorpus(_) => "INVALID_CORPUS",
        }
    }
}

impl From<rusqlite::Error> for StoreError {
    fn from(e: rusqlite::Error) -> Self {
        StoreError::StorageFailure(e.to_string())
    }
}

impl From<serde_json::Error> for StoreError {
    fn from(e: serde_json::Error) -> Self {
        StoreError::StorageFailure(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub inserted: usize,
    pub replaced: usize,
}

/// Durable home of the corpus.
pub trait CorpusBackend: Send + Sync {
    /// All records in ingest order.
    fn load(&self) -> Result<Vec<TweetRecord>, StoreError>;
    /// Atomically replaces the stored corpus; returns the previous count.
    fn replace(&self, records: &[TweetRecord]) -> Result<usize, StoreError>;
}

#[derive(Debug, Default)]
pub struct MemoryCorpusBackend {
    records: Mutex<Vec<TweetRecord>>,
}

impl CorpusBackend for MemoryCorpusBackend {
    fn load(&self) -> Result<Vec<TweetRecord>, StoreError> {
        Ok(self
            .records
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .clone())
    }

    fn replace(&self, records: &[TweetRecord]) -> Result<usize, StoreError> {
        let mut guard = self.records.lock().unwrap_or_else(PoisonError::into_inner);
        let previous = guard.len();
        *guard = records.to_vec();
        Ok(previous)
    }
}

pub struct SqliteCorpusBackend {
    conn: Mutex<Connection>,
}

impl SqliteCorpusBackend {
    pub fn new(conn: Connection) -> Self {
        SqliteCorpusBackend {
            conn: Mutex::new(conn),
        }
    }
}

fn category_str(c: Category) -> &'static str {
    match c {
        Category::HateSpeech => "hate_speech",
        Category::Misinformation => "misinformation",
        Category::Normal => "normal",
    }
}

impl CorpusBackend for SqliteCorpusBackend {
    fn load(&self) -> Result<Vec<TweetRecord>, StoreError> {
        let conn = self.conn.lock().unwrap_or_else(PoisonError::into_inner);
        let mut stmt = conn.prepare("SELECT record FROM tweets ORDER BY position")?;
        let rows = stmt.query_map([], |row| row.get::<_, String>(0))?;
        let mut records = Vec::new();
        for json in rows {
            records.push(serde_json::from_str(&json?)?);
        }
        Ok(records)
    }

    fn replace(&self, records: &[TweetRecord]) -> Result<usize, StoreError> {
        let mut conn = self.conn.lock().unwrap_or_else(PoisonError::into_inner);
        let tx = conn.transaction()?;
        let previous: usize = tx.query_row("SELECT COUNT(*) FROM tweets", [], |r| r.get(0))?;
        tx.execute("DELETE FROM tweets", [])?;
        {
            let mut insert = tx.prepare(
                "INSERT INTO tweets (position, id, category, is_bot, verified, sentiment_label, language, record)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            )?;
            for (pos, r) in records.iter().enumerate() {
                insert.execute(params![
                    pos as i64,
                    r.id,
                    category_str(r.category),
                    r.is_bot,
                    r.verified,
                    r.sentiment_label.as_str(),
                    r.language.as_str(),
                    serde_json::to_string(r)?,
                ])?;
            }
        }
        tx.commit()?;
        Ok(previous)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for i in 0..len {
            if f(i) {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Bitset { words, len }
    }

    fn full(len: usize) -> Self {
        Bitset::from_fn(len, |_| true)
    }

    fn intersect(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    fn subtract(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

/// Immutable corpus plus attribute postings.
#[derive(Debug)]
pub struct Snapshot {
    records: Vec<TweetRecord>,
    by_id: HashMap<String, usize>,
    hate: Bitset,
    misinformation: Bitset,
    bot: Bitset,
    verified: Bitset,
    sentiment: [Bitset; 3],
    language: [Bitset; 3],
}

fn sentiment_slot(l: SentimentLabel) -> usize {
    match l {
        SentimentLabel::Positive => 0,
        SentimentLabel::Neutral => 1,
        SentimentLabel::Negative => 2,
    }
}

fn language_slot(l: Language) -> usize {
    match l {
        Language::En => 0,
        Language::Es => 1,
        Language::Unknown => 2,
    }
}

impl Snapshot {
    fn build(records: Vec<TweetRecord>) -> Self {
        let n = records.len();
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let set = |f: &dyn Fn(&TweetRecord) -> bool| Bitset::from_fn(n, |i| f(&records[i]));
        let sentiment = [0, 1, 2].map(|slot| set(&|r| sentiment_slot(r.sentiment_label) == slot));
        let language = [0, 1, 2].map(|slot| set(&|r| language_slot(r.language) == slot));
        Snapshot {
            hate: set(&|r| r.category == Category::HateSpeech),
            misinformation: set(&|r| r.category == Category::Misinformation),
            bot: set(&|r| r.is_bot),
            verified: set(&|r| r.verified),
            sentiment,
            language,
            by_id,
            records,
        }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TweetRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    fn matching(&self, q: &FilterQuery) -> Bitset {
        let mut mask = Bitset::full(self.records.len());
        for (selector, postings) in [
            (q.hate, &self.hate),
            (q.misinformation, &self.misinformation),
            (q.bot, &self.bot),
            (q.verified, &self.verified),
        ] {
            match selector {
                TriState::Any => {}
                TriState::Yes => mask.intersect(postings),
                TriState::No => mask.subtract(postings),
            }
        }
        if let Some(label) = q.sentiment.label() {
            mask.intersect(&self.sentiment[sentiment_slot(label)]);
        }
        if let Some(lang) = q.language.language() {
            mask.intersect(&self.language[language_slot(lang)]);
        }
        mask
    }

    /// Validates `q`, then returns the requested page of matches.
    pub fn query(&self, q: &FilterQuery) -> Result<Page, FilterError> {
        q.validate()?;
        let mask = self.matching(q);
        let skip = (q.page as usize - 1).saturating_mul(q.page_size as usize);
        let items = mask
            .ones()
            .skip(skip)
            .take(q.page_size as usize)
            .map(|i| self.records[i].clone())
            .collect();
        Ok(Page {
            items,
            page: q.page,
            page_size: q.page_size,
            total_matching: mask.count(),
        })
    }

    /// Count of matches without materializing a page.
    pub fn count(&self, q: &FilterQuery) -> Result<usize, FilterError> {
        q.validate()?;
        Ok(self.matching(q).count())
    }
}

pub struct CorpusStore {
    backend: Box<dyn CorpusBackend>,
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
}

impl CorpusStore {
    /// Opens a store over `backend`, loading whatever it already holds.
    pub fn open(backend: Box<dyn CorpusBackend>) -> Result<Self, StoreError> {
        let records = backend.load()?;
        Ok(CorpusStore {
            backend,
            snapshot: RwLock::new(Arc::new(Snapshot::build(records))),
            writer: Mutex::new(()),
        })
    }

    pub fn in_memory() -> Self {
        CorpusStore::open(Box::<MemoryCorpusBackend>::default())
            .expect("empty memory backend always loads")
    }

    pub fn open_location(location: &StorageLocation) -> Result<Self, StoreError> {
        match location {
            StorageLocation::Memory => Ok(CorpusStore::in_memory()),
            StorageLocation::Sqlite(path) => {
                let conn = db::open_sqlite(path)?;
                CorpusStore::open(Box::new(SqliteCorpusBackend::new(conn)))
            }
        }
    }

    /// Current snapshot; cheap to clone and safe to hold across a reload.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.snapshot().len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshot().is_empty()
    }

    /// Replaces the stored corpus with `corpus`.
    pub fn bulk_load(&self, corpus: &Corpus) -> Result<LoadReport, StoreError> {
        corpus.validate()?;
        let _writer = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let replaced = self.backend.replace(&corpus.records)?;
        let fresh = Arc::new(Snapshot::build(corpus.records.clone()));
        *self
            .snapshot
            .write()
            .unwrap_or_else(PoisonError::into_inner) = fresh;
        tracing::info!(inserted = corpus.len(), replaced, "corpus loaded");
        Ok(LoadReport {
            inserted: corpus.len(),
            replaced,
        })
    }

    pub fn query(&self, q: &FilterQuery) -> Result<Page, FilterError> {
        self.snapshot().query(q)
    }

    pub fn get(&self, id: &str) -> Option<TweetRecord> {
        self.snapshot().get(id).cloned()
    }

    pub fn get_meta(&self, id: &str) -> Result<MetaInfo, StoreError> {
        self.snapshot()
            .get(id)
            .map(MetaInfo::from)
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }
}
