//! End-to-end ingest: parse, normalize, annotate, merge.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::annotate::{Annotator, OfflineBotProvider};
use crate::ingest::{self, IngestError, InputFormat, Reject};
use crate::model::{Corpus, SourceTag, TweetRecord};

pub struct SourceBatch {
    pub records: Vec<TweetRecord>,
    pub rejects: Vec<Reject>,
}

pub fn ingest_source<R: Read>(
    input: R,
    format: InputFormat,
    source: SourceTag,
    annotator: &Annotator,
) -> Result<SourceBatch, IngestError> {
    let parsed = ingest::parse_corpus(input, format, source)?;
    let (records, rejects) = ingest::normalize_all(parsed, source);
    Ok(SourceBatch {
        records: annotator.annotate_all(records),
        rejects,
    })
}

/// Directory holding the bundled synthetic fixture.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_bot_provider() -> std::io::Result<OfflineBotProvider> {
    let file = File::open(fixture_dir().join("bot_scores.tsv"))?;
    OfflineBotProvider::parse(BufReader::new(file)).map_err(std::io::Error::other)
}

/// Ingests both bundled fixture files with the built-in lexicon, stopwords
/// and the fixture bot scores.
pub fn bundled_corpus() -> Result<(Corpus, Vec<Reject>), IngestError> {
    let annotator = Annotator::with_provider(Arc::new(fixture_bot_provider()?));
    let dir = fixture_dir();
    let hate = ingest_source(
        File::open(dir.join("hate_speech.csv"))?,
        InputFormat::Csv,
        SourceTag::HateDataset,
        &annotator,
    )?;
    let misinfo = ingest_source(
        File::open(dir.join("misinformation.jsonl"))?,
        InputFormat::Jsonl,
        SourceTag::MisinfoDataset,
        &annotator,
    )?;
    let mut rejects = hate.rejects;
    rejects.extend(misinfo.rejects);
    Ok((
        ingest::merge(hate.records.into_iter().chain(misinfo.records)),
        rejects,
    ))
}
