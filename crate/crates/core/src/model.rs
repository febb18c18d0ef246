//! Canonical record types shared by every stage of the pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Threshold at or above which an account is treated as automated.
pub const BOT_THRESHOLD: f64 = 0.5;

/// Which labelled dataset a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceTag {
    HateDataset,
    MisinfoDataset,
}

impl SourceTag {
    pub const ALL: [SourceTag; 2] = [SourceTag::HateDataset, SourceTag::MisinfoDataset];

    /// Prefix used when building globally unique record ids.
    pub fn id_prefix(self) -> &'static str {
        match self {
            SourceTag::HateDataset => "hate",
            SourceTag::MisinfoDataset => "misinfo",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id_prefix())
    }
}

impl FromStr for SourceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hate" | "hate_dataset" => Ok(SourceTag::HateDataset),
            "misinfo" | "misinfo_dataset" => Ok(SourceTag::MisinfoDataset),
            other => Err(format!(
                "unknown source `{other}` (expected hate or misinfo)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    HateSpeech,
    Misinformation,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HateSubtype {
    Racism,
    Sexism,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Es,
    Unknown,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
            Language::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl SentimentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Negative => "negative",
        }
    }
}

/// Where a record's bot score came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotStatus {
    /// Not yet annotated.
    Pending,
    /// Score shipped with the source dataset.
    Dataset,
    /// Score obtained from a bot provider.
    Provider,
    /// Provider failed or no account handle was known; score defaults to 0.
    Unscored,
}

/// A normalized, (eventually) annotated post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub source: SourceTag,
    pub category: Category,
    pub hate_subtype: HateSubtype,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact_check_url: Option<String>,
    pub verified: bool,
    pub language: Language,
    pub sentiment_compound: f64,
    pub sentiment_label: SentimentLabel,
    pub bot_score: f64,
    pub is_bot: bool,
    pub bot_status: BotStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("record `{0}`: hate_subtype set on a non-hate-speech record")]
    SubtypeWithoutHate(String),
    #[error(
        "record `{0}`: fact_check_url must be present exactly when category is misinformation"
    )]
    FactCheckMismatch(String),
    #[error("record `{0}`: sentiment_compound outside [-1, 1]")]
    CompoundOutOfRange(String),
    #[error("record `{0}`: bot_score outside [0, 1]")]
    BotScoreOutOfRange(String),
    #[error("record `{0}`: is_bot disagrees with bot_score")]
    BotFlagMismatch(String),
    #[error("record with empty id")]
    EmptyId,
    #[error("record `{0}`: empty text")]
    EmptyText(String),
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
}

impl TweetRecord {
    pub fn is_hate_speech(&self) -> bool {
        self.category == Category::HateSpeech
    }

    pub fn is_misinformation(&self) -> bool {
        self.category == Category::Misinformation
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let id = || self.id.clone();
        if self.id.is_empty() {
            return Err(InvariantViolation::EmptyId);
        }
        if self.text.trim().is_empty() {
            return Err(InvariantViolation::EmptyText(id()));
        }
        if self.hate_subtype != HateSubtype::None && self.category != Category::HateSpeech {
            return Err(InvariantViolation::SubtypeWithoutHate(id()));
        }
        if self.fact_check_url.is_some() != self.is_misinformation() {
            return Err(InvariantViolation::FactCheckMismatch(id()));
        }
        if !(-1.0..=1.0).contains(&self.sentiment_compound) {
            return Err(InvariantViolation::CompoundOutOfRange(id()));
        }
        if !(0.0..=1.0).contains(&self.bot_score) {
            return Err(InvariantViolation::BotScoreOutOfRange(id()));
        }
        if self.is_bot != (self.bot_score >= BOT_THRESHOLD) {
            return Err(InvariantViolation::BotFlagMismatch(id()));
        }
        Ok(())
    }
}

/// An ordered, id-unique collection of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    pub counts_by_source: BTreeMap<SourceTag, usize>,
}

impl Default for Corpus {
    fn default() -> Self {
        Corpus {
            records: Vec::new(),
            counts_by_source: SourceTag::ALL.iter().map(|s| (*s, 0)).collect(),
        }
    }
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, source: SourceTag) -> usize {
        self.counts_by_source.get(&source).copied().unwrap_or(0)
    }

    /// Checks every record invariant plus id uniqueness.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let mut seen = std::collections::HashSet::with_capacity(self.records.len());
        for r in &self.records {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(InvariantViolation::DuplicateId(r.id.clone()));
            }
        }
        Ok(())
    }
}
