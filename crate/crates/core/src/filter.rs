//! Tri-state timeline filters and the per-tweet meta-information projection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Category, HateSubtype, Language, SentimentLabel, TweetRecord};

pub const DEFAULT_PAGE_SIZE: u32 = 20;
pub const MAX_PAGE_SIZE: u32 = 100;

/// Names of the accepted query parameters, in canonical order.
pub const PARAM_NAMES: [&str; 8] = [
    "hate",
    "misinformation",
    "bot",
    "verified",
    "sentiment",
    "language",
    "page",
    "page_size",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("hate=yes and misinformation=yes cannot be combined")]
    MutuallyExclusive,
    #[error("invalid value for `{param}`: `{value}`")]
    InvalidValue { param: String, value: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{0}` given more than once")]
    DuplicateParameter(String),
    #[error("page must be >= 1 and page_size in [1, {MAX_PAGE_SIZE}]; got page={page}, page_size={page_size}")]
    InvalidPagination { page: String, page_size: String },
}

impl FilterError {
    pub fn code(&self) -> &'static str {
        match self {
            FilterError::MutuallyExclusive => "MUTUALLY_EXCLUSIVE_FILTERS",
            FilterError::InvalidValue { .. }
            | FilterError::UnknownParameter(_)
            | FilterError::DuplicateParameter(_) => "INVALID_FILTER_VALUE",
            FilterError::InvalidPagination { .. } => "INVALID_PAGINATION",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    Any,
    Yes,
    No,
}

impl TriState {
    pub const ALL: [TriState; 3] = [TriState::Any, TriState::Yes, TriState::No];

    pub fn accepts(self, attribute: bool) -> bool {
        match self {
            TriState::Any => true,
            TriState::Yes => attribute,
            TriState::No => !attribute,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TriState::Any => "any",
            TriState::Yes => "yes",
            TriState::No => "no",
        }
    }
}

impl FromStr for TriState {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "any" => Ok(TriState::Any),
            "yes" => Ok(TriState::Yes),
            "no" => Ok(TriState::No),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentSelector {
    Any,
    Positive,
    Neutral,
    Negative,
}

impl SentimentSelector {
    pub const ALL: [SentimentSelector; 4] = [
        SentimentSelector::Any,
        SentimentSelector::Positive,
        SentimentSelector::Neutral,
        SentimentSelector::Negative,
    ];

    pub fn label(self) -> Option<SentimentLabel> {
        match self {
            SentimentSelector::Any => None,
            SentimentSelector::Positive => Some(SentimentLabel::Positive),
            SentimentSelector::Neutral => Some(SentimentLabel::Neutral),
            SentimentSelector::Negative => Some(SentimentLabel::Negative),
        }
    }

    pub fn as_str(self) -> &'static str {
        self.label().map_or("any", SentimentLabel::as_str)
    }
}

impl FromStr for SentimentSelector {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|v| v.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageSelector {
    Any,
    En,
    Es,
}

impl LanguageSelector {
    pub const ALL: [LanguageSelector; 3] = [
        LanguageSelector::Any,
        LanguageSelector::En,
        LanguageSelector::Es,
    ];

    pub fn language(self) -> Option<Language> {
        match self {
            LanguageSelector::Any => None,
            LanguageSelector::En => Some(Language::En),
            LanguageSelector::Es => Some(Language::Es),
        }
    }

    pub fn as_str(self) -> &'static str {
        self.language().map_or("any", Language::as_str)
    }
}

impl FromStr for LanguageSelector {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|v| v.as_str() == s).ok_or(())
    }
}

/// A timeline query. [`Default`] gives the initial timeline: every boolean
/// selector set to `no`, categorical selectors `any`, first page of 20.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterQuery {
    pub hate: TriState,
    pub misinformation: TriState,
    pub bot: TriState,
    pub verified: TriState,
    pub sentiment: SentimentSelector,
    pub language: LanguageSelector,
    pub page: u32,
    pub page_size: u32,
}

impl Default for FilterQuery {
    fn default() -> Self {
        FilterQuery {
            hate: TriState::No,
            misinformation: TriState::No,
            bot: TriState::No,
            verified: TriState::No,
            sentiment: SentimentSelector::Any,
            language: LanguageSelector::Any,
            page: 1,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

impl FilterQuery {
    /// Every selector at `any`.
    pub fn match_all() -> Self {
        FilterQuery {
            hate: TriState::Any,
            misinformation: TriState::Any,
            bot: TriState::Any,
            verified: TriState::Any,
            ..FilterQuery::default()
        }
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if self.page < 1 || !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(FilterError::InvalidPagination {
                page: self.page.to_string(),
                page_size: self.page_size.to_string(),
            });
        }
        if self.hate == TriState::Yes && self.misinformation == TriState::Yes {
            return Err(FilterError::MutuallyExclusive);
        }
        Ok(())
    }

    /// Parses query parameters. Missing parameters take their defaults;
    /// unknown or repeated parameters are rejected. The result is validated.
    pub fn from_params<'a, I>(params: I) -> Result<Self, FilterError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut q = FilterQuery::default();
        let mut seen = [false; PARAM_NAMES.len()];
        let mut page_raw: Option<&str> = None;
        let mut size_raw: Option<&str> = None;

        for (key, value) in params {
            let slot = PARAM_NAMES
                .iter()
                .position(|p| *p == key)
                .ok_or_else(|| FilterError::UnknownParameter(key.to_string()))?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(FilterError::DuplicateParameter(key.to_string()));
            }
            let invalid = || FilterError::InvalidValue {
                param: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "hate" => q.hate = value.parse().map_err(|_| invalid())?,
                "misinformation" => q.misinformation = value.parse().map_err(|_| invalid())?,
                "bot" => q.bot = value.parse().map_err(|_| invalid())?,
                "verified" => q.verified = value.parse().map_err(|_| invalid())?,
                "sentiment" => q.sentiment = value.parse().map_err(|_| invalid())?,
                "language" => q.language = value.parse().map_err(|_| invalid())?,
                "page" => page_raw = Some(value),
                "page_size" => size_raw = Some(value),
                _ => unreachable!("checked against PARAM_NAMES"),
            }
        }

        if page_raw.is_some() || size_raw.is_some() {
            let bad = || FilterError::InvalidPagination {
                page: page_raw.unwrap_or("1").to_string(),
                page_size: size_raw.unwrap_or("20").to_string(),
            };
            if let Some(p) = page_raw {
                q.page = p.parse().map_err(|_| bad())?;
            }
            if let Some(s) = size_raw {
                q.page_size = s.parse().map_err(|_| bad())?;
            }
        }
        q.validate()?;
        Ok(q)
    }

    /// Every parameter, in canonical order.
    pub fn to_params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("hate", self.hate.as_str().to_string()),
            ("misinformation", self.misinformation.as_str().to_string()),
            ("bot", self.bot.as_str().to_string()),
            ("verified", self.verified.as_str().to_string()),
            ("sentiment", self.sentiment.as_str().to_string()),
            ("language", self.language.as_str().to_string()),
            ("page", self.page.to_string()),
            ("page_size", self.page_size.to_string()),
        ]
    }

    /// Query string without the leading `?`. All values are URL-safe.
    pub fn to_query_string(&self) -> String {
        self.to_params()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("&")
    }

    /// The same selectors on a different page.
    pub fn with_page(self, page: u32) -> Self {
        FilterQuery { page, ..self }
    }
}

impl fmt::Display for FilterQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_query_string())
    }
}

/// Per-record predicate: the conjunction of every selector.
pub fn matches(record: &TweetRecord, q: &FilterQuery) -> bool {
    q.hate.accepts(record.category == Category::HateSpeech)
        && q.misinformation
            .accepts(record.category == Category::Misinformation)
        && q.bot.accepts(record.is_bot)
        && q.verified.accepts(record.verified)
        && q.sentiment
            .label()
            .is_none_or(|l| l == record.sentiment_label)
        && q.language.language().is_none_or(|l| l == record.language)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub items: Vec<TweetRecord>,
    pub page: u32,
    pub page_size: u32,
    pub total_matching: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotMeta {
    pub flag: bool,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HateMeta {
    pub flag: bool,
    pub subtype: HateSubtype,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisinformationMeta {
    pub flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact_check_url: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentMeta {
    pub label: SentimentLabel,
    pub compound: f64,
}

/// What the meta pop-up shows for one tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaInfo {
    pub tweet_id: String,
    pub bot: BotMeta,
    pub hate_speech: HateMeta,
    pub misinformation: MisinformationMeta,
    pub verified: bool,
    pub sentiment: SentimentMeta,
    pub category: Category,
    pub language: Language,
}

impl From<&TweetRecord> for MetaInfo {
    fn from(r: &TweetRecord) -> Self {
        MetaInfo {
            tweet_id: r.id.clone(),
            bot: BotMeta {
                flag: r.is_bot,
                score: r.bot_score,
            },
            hate_speech: HateMeta {
                flag: r.is_hate_speech(),
                subtype: r.hate_subtype,
            },
            misinformation: MisinformationMeta {
                flag: r.is_misinformation(),
                fact_check_url: r.fact_check_url.clone(),
            },
            verified: r.verified,
            sentiment: SentimentMeta {
                label: r.sentiment_label,
                compound: r.sentiment_compound,
            },
            category: r.category,
            language: r.language,
        }
    }
}
