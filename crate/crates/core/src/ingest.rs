//! Parsing of labelled source files, label normalization and corpus merging.
//!
//! Both source datasets are accepted either as JSONL (one object per line)
//! or CSV with a header row. Field names are shared between the two formats:
//! `source_id`, `text`, `label`, and the optional `fact_check_url`,
//! `verified`, `bot_score`, `language_hint`, `author`.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{
    BotStatus, Category, Corpus, HateSubtype, InvariantViolation, Language, SentimentLabel,
    SourceTag, TweetRecord, BOT_THRESHOLD,
};

pub const REQUIRED_COLUMNS: [&str; 3] = ["source_id", "text", "label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected jsonl or csv)")),
        }
    }
}

/// A source row after field extraction, before label mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub source_id: String,
    pub text: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact_check_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

/// One input line that could not become a [`TweetRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number in the input.
    pub line: u64,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ParseOutput {
    pub records: Vec<RawRecord>,
    pub rejects: Vec<Reject>,
    /// Line number of each entry in `records`.
    pub lines: Vec<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("UNDECODABLE_INPUT: input is not valid UTF-8 (byte offset {0})")]
    UndecodableInput(usize),
    #[error("MISSING_REQUIRED_COLUMN: csv header lacks `{0}`")]
    MissingRequiredColumn(String),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid corpus line {line}: {reason}")]
    InvalidCorpusLine { line: u64, reason: String },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::UndecodableInput(_) => "UNDECODABLE_INPUT",
            IngestError::MissingRequiredColumn(_) => "MISSING_REQUIRED_COLUMN",
            _ => "INVALID_INPUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("UNKNOWN_LABEL: `{label}` is not a {dataset} label")]
    UnknownLabel { label: String, dataset: SourceTag },
    #[error("MISSING_FACT_CHECK: misinformation record `{0}` has no fact_check_url")]
    MissingFactCheck(String),
    #[error("invalid raw record: {0}")]
    InvalidRaw(String),
}

impl NormalizeError {
    pub fn code(&self) -> &'static str {
        match self {
            NormalizeError::UnknownLabel { .. } => "UNKNOWN_LABEL",
            NormalizeError::MissingFactCheck(_) => "MISSING_FACT_CHECK",
            NormalizeError::InvalidRaw(_) => "INVALID_RECORD",
        }
    }
}

/// Loosely-typed view of a row; every field is optional until validated.
#[derive(Debug, Default, Deserialize)]
struct Fields {
    source_id: Option<serde_json::Value>,
    text: Option<String>,
    label: Option<String>,
    fact_check_url: Option<String>,
    verified: Option<serde_json::Value>,
    bot_score: Option<serde_json::Value>,
    language_hint: Option<String>,
    author: Option<String>,
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.map(|v| v.trim().to_string()).filter(|v| !v.is_empty())
}

fn parse_bool(v: &serde_json::Value) -> Result<Option<bool>, String> {
    match v {
        serde_json::Value::Null => Ok(None),
        serde_json::Value::Bool(b) => Ok(Some(*b)),
        serde_json::Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "" => Ok(None),
            "true" | "1" | "yes" => Ok(Some(true)),
            "false" | "0" | "no" => Ok(Some(false)),
            other => Err(format!("verified: `{other}` is not a boolean")),
        },
        serde_json::Value::Number(n) => match n.as_u64() {
            Some(1) => Ok(Some(true)),
            Some(0) => Ok(Some(false)),
            _ => Err(format!("verified: `{n}` is not a boolean")),
        },
        other => Err(format!("verified: unexpected value {other}")),
    }
}

fn parse_score(v: &serde_json::Value) -> Result<Option<f64>, String> {
    let score = match v {
        serde_json::Value::Null => return Ok(None),
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) if s.trim().is_empty() => return Ok(None),
        serde_json::Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    };
    match score {
        Some(x) if (0.0..=1.0).contains(&x) => Ok(Some(x)),
        Some(x) => Err(format!("bot_score {x} outside [0, 1]")),
        None => Err(format!("bot_score: `{v}` is not a number")),
    }
}

impl Fields {
    fn into_raw(self) -> Result<RawRecord, (String, Option<String>)> {
        let source_id = match self.source_id {
            Some(serde_json::Value::String(s)) => non_empty(Some(s)),
            Some(serde_json::Value::Number(n)) => Some(n.to_string()),
            _ => None,
        };
        let fail = |reason: String| Err((reason, source_id.clone()));
        let Some(id) = source_id.clone() else {
            return fail("missing source_id".into());
        };
        let Some(text) = self.text.filter(|t| !t.trim().is_empty()) else {
            return fail("text is empty".into());
        };
        let Some(label) = non_empty(self.label) else {
            return fail("missing label".into());
        };
        let verified = match self.verified.as_ref().map(parse_bool).transpose() {
            Ok(v) => v.flatten(),
            Err(e) => return fail(e),
        };
        let bot_score = match self.bot_score.as_ref().map(parse_score).transpose() {
            Ok(v) => v.flatten(),
            Err(e) => return fail(e),
        };
        Ok(RawRecord {
            source_id: id,
            text,
            label,
            fact_check_url: non_empty(self.fact_check_url),
            verified,
            bot_score,
            language_hint: non_empty(self.language_hint),
            author: non_empty(self.author),
        })
    }
}

/// Reads the whole input, checking it is UTF-8, and splits it into rows.
pub fn parse_corpus<R: Read>(
    mut input: R,
    format: InputFormat,
    _source: SourceTag,
) -> Result<ParseOutput, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text =
        std::str::from_utf8(&bytes).map_err(|e| IngestError::UndecodableInput(e.valid_up_to()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    match format {
        InputFormat::Jsonl => Ok(parse_jsonl(text)),
        InputFormat::Csv => parse_csv(text),
    }
}

fn parse_jsonl(text: &str) -> ParseOutput {
    let mut out = ParseOutput::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Fields = match serde_json::from_str(line) {
            Ok(f) => f,
            Err(e) => {
                out.rejects.push(Reject {
                    line: line_no,
                    reason: format!("malformed json: {e}"),
                    source_id: None,
                });
                continue;
            }
        };
        push_row(&mut out, line_no, fields);
    }
    out
}

fn parse_csv(text: &str) -> Result<ParseOutput, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    for required in REQUIRED_COLUMNS {
        if !headers.iter().any(|h| h == required) {
            return Err(IngestError::MissingRequiredColumn(required.to_string()));
        }
    }

    let mut out = ParseOutput::default();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                out.rejects.push(Reject {
                    line,
                    reason: format!("malformed csv row: {e}"),
                    source_id: None,
                });
                continue;
            }
        };
        let line_no = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != headers.len() {
            out.rejects.push(Reject {
                line: line_no,
                reason: format!("expected {} fields, found {}", headers.len(), row.len()),
                source_id: None,
            });
            continue;
        }
        let mut fields = Fields::default();
        for (name, value) in headers.iter().zip(row.iter()) {
            let s = || Some(value.to_string());
            let v = || Some(serde_json::Value::String(value.to_string()));
            match name.as_str() {
                "source_id" => fields.source_id = v(),
                "text" => fields.text = s(),
                "label" => fields.label = s(),
                "fact_check_url" => fields.fact_check_url = s(),
                "verified" => fields.verified = v(),
                "bot_score" => fields.bot_score = v(),
                "language_hint" => fields.language_hint = s(),
                "author" => fields.author = s(),
                _ => {}
            }
        }
        push_row(&mut out, line_no, fields);
    }
    Ok(out)
}

fn push_row(out: &mut ParseOutput, line: u64, fields: Fields) {
    match fields.into_raw() {
        Ok(raw) => {
            out.records.push(raw);
            out.lines.push(line);
        }
        Err((reason, source_id)) => out.rejects.push(Reject {
            line,
            reason,
            source_id,
        }),
    }
}

fn map_label(label: &str, source: SourceTag) -> Option<(Category, HateSubtype)> {
    let label = label.trim().to_ascii_lowercase();
    match (source, label.as_str()) {
        (SourceTag::HateDataset, "racism") => Some((Category::HateSpeech, HateSubtype::Racism)),
        (SourceTag::HateDataset, "sexism") => Some((Category::HateSpeech, HateSubtype::Sexism)),
        (SourceTag::HateDataset, "none") => Some((Category::Normal, HateSubtype::None)),
        (SourceTag::MisinfoDataset, "false" | "partially_false") => {
            Some((Category::Misinformation, HateSubtype::None))
        }
        (SourceTag::MisinfoDataset, "true") => Some((Category::Normal, HateSubtype::None)),
        _ => None,
    }
}

/// Maps a raw row onto the canonical record. Annotation fields are left at
/// their sentinel values; a dataset-supplied bot score is kept.
pub fn normalize(raw: &RawRecord, source: SourceTag) -> Result<TweetRecord, NormalizeError> {
    if raw.source_id.trim().is_empty() {
        return Err(NormalizeError::InvalidRaw("empty source_id".into()));
    }
    if raw.text.trim().is_empty() {
        return Err(NormalizeError::InvalidRaw("empty text".into()));
    }
    let (category, hate_subtype) =
        map_label(&raw.label, source).ok_or_else(|| NormalizeError::UnknownLabel {
            label: raw.label.clone(),
            dataset: source,
        })?;
    let id = format!("{}:{}", source.id_prefix(), raw.source_id);

    let fact_check_url = if category == Category::Misinformation {
        match raw.fact_check_url.as_deref().map(str::trim) {
            Some(url) if !url.is_empty() => Some(url.to_string()),
            _ => return Err(NormalizeError::MissingFactCheck(id)),
        }
    } else {
        None
    };

    let (bot_score, bot_status) = match raw.bot_score {
        Some(s) if (0.0..=1.0).contains(&s) => (s, BotStatus::Dataset),
        Some(s) => {
            return Err(NormalizeError::InvalidRaw(format!(
                "bot_score {s} outside [0, 1]"
            )))
        }
        None => (0.0, BotStatus::Pending),
    };

    Ok(TweetRecord {
        id,
        text: raw.text.clone(),
        source,
        category,
        hate_subtype,
        fact_check_url,
        verified: raw.verified.unwrap_or(false),
        language: Language::Unknown,
        sentiment_compound: 0.0,
        sentiment_label: SentimentLabel::Neutral,
        bot_score,
        is_bot: bot_score >= BOT_THRESHOLD,
        bot_status,
        author: raw.author.clone(),
        language_hint: raw.language_hint.clone(),
    })
}

/// Normalizes every parsed row, appending failures to the parse rejects.
pub fn normalize_all(parsed: ParseOutput, source: SourceTag) -> (Vec<TweetRecord>, Vec<Reject>) {
    let mut rejects = parsed.rejects;
    let mut records = Vec::with_capacity(parsed.records.len());
    for (raw, line) in parsed.records.iter().zip(parsed.lines) {
        match normalize(raw, source) {
            Ok(r) => records.push(r),
            Err(e) => rejects.push(Reject {
                line,
                reason: e.to_string(),
                source_id: Some(raw.source_id.clone()),
            }),
        }
    }
    rejects.sort_by_key(|r| r.line);
    (records, rejects)
}

/// Collapses duplicate ids (first occurrence wins) and tallies sources.
pub fn merge(records: impl IntoIterator<Item = TweetRecord>) -> Corpus {
    let mut corpus = Corpus::default();
    let mut seen = HashSet::new();
    for r in records {
        if seen.insert(r.id.clone()) {
            *corpus.counts_by_source.entry(r.source).or_insert(0) += 1;
            corpus.records.push(r);
        }
    }
    corpus
}

/// Writes the canonical corpus export: one record per line, LF endings.
pub fn write_corpus_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> io::Result<()> {
    for r in &corpus.records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads a canonical corpus export, validating each record.
pub fn read_corpus_jsonl<R: BufRead>(input: R) -> Result<Corpus, IngestError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            io::ErrorKind::InvalidData => IngestError::UndecodableInput(0),
            _ => IngestError::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TweetRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::InvalidCorpusLine {
                line: idx as u64 + 1,
                reason: e.to_string(),
            })?;
        record.validate()?;
        records.push(record);
    }
    Ok(merge(records))
}

pub fn write_rejects_jsonl<W: Write>(rejects: &[Reject], mut out: W) -> io::Result<()> {
    for r in rejects {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Source counts for a set of records; used by reports.
pub fn count_sources<'a>(
    records: impl IntoIterator<Item = &'a TweetRecord>,
) -> BTreeMap<SourceTag, usize> {
    let mut counts: BTreeMap<SourceTag, usize> = SourceTag::ALL.iter().map(|s| (*s, 0)).collect();
    for r in records {
        *counts.entry(r.source).or_insert(0) += 1;
    }
    counts
}
