//! Core of the TweetInfo timeline service.
//!
//! * [`ingest`] parses the labelled source datasets into canonical records.
//! * [`annotate`] adds sentiment, language and bot meta-information.
//! * [`store`] holds the corpus and answers tri-state [`filter`] queries.
//! * [`telemetry`] records UI clicks idempotently.
//! * [`auth`] and [`config`] back the HTTP service.

pub mod annotate;
pub mod auth;
pub mod config;
pub mod db;
pub mod filter;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod store;
pub mod telemetry;

pub use filter::{FilterQuery, LanguageSelector, MetaInfo, Page, SentimentSelector, TriState};
pub use model::{
    BotStatus, Category, Corpus, HateSubtype, Language, SentimentLabel, SourceTag, TweetRecord,
};
pub use store::{CorpusStore, LoadReport};
pub use telemetry::{ClickEvent, EventStore, RecordedClick};
