use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use tweetinfo_core::annotate::language::read_stopwords;
use tweetinfo_core::annotate::{
    Annotator, BotProvider, LanguageDetector, OfflineBotProvider, RemoteBotProvider,
    SentimentAnalyzer, SentimentLexicon,
};
use tweetinfo_core::config::{BotProviderKind, Config};
use tweetinfo_core::ingest::{self, InputFormat};
use tweetinfo_core::pipeline::ingest_source;
use tweetinfo_core::telemetry::{export_events, open_event_store};
use tweetinfo_core::{Corpus, CorpusStore, SourceTag};

#[derive(Parser)]
#[command(
    name = "tweetinfo",
    version,
    about = "Harmful-content aware tweet timeline service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, normalize and annotate one source dataset into canonical JSONL.
    Ingest(IngestArgs),
    /// Replace the stored corpus with one or more canonical JSONL files.
    Load {
        /// Canonical corpus file; repeat to merge several (first id wins).
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Load these corpus files before serving; needed with the memory store.
        #[arg(long)]
        corpus: Vec<PathBuf>,
    },
    /// Click telemetry.
    Events {
        #[command(subcommand)]
        command: EventsCommand,
    },
    /// Read a password from stdin and print its argon2 PHC hash for the config.
    HashPassword,
}

#[derive(Args)]
struct IngestArgs {
    /// `hate` or `misinfo`.
    #[arg(long)]
    source: SourceTag,
    /// `jsonl` or `csv`.
    #[arg(long)]
    format: InputFormat,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rejects: PathBuf,
    /// `token<TAB>valence` file replacing the built-in lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    stopwords_en: Option<PathBuf>,
    #[arg(long)]
    stopwords_es: Option<PathBuf>,
    /// Supplies the bot provider settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EventsCommand {
    /// Write events with client_timestamp in [from, to) as JSONL.
    Export {
        #[arg(long)]
        from: DateTime<Utc>,
        #[arg(long)]
        to: DateTime<Utc>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn bot_provider(config: &Config) -> Result<Arc<dyn BotProvider>> {
    Ok(match config.bot_provider {
        BotProviderKind::Remote => Arc::new(RemoteBotProvider::from_env()?),
        BotProviderKind::Offline => match &config.bot_scores {
            Some(path) => Arc::new(OfflineBotProvider::parse(open(path)?)?),
            None => Arc::new(OfflineBotProvider::default()),
        },
    })
}

fn ingest(args: IngestArgs) -> Result<()> {
    let config = Config::load(args.config.as_deref())?;
    let sentiment = match &args.lexicon {
        Some(path) => SentimentAnalyzer::new(SentimentLexicon::parse(open(path)?)?),
        None => SentimentAnalyzer::default(),
    };
    let language = match (&args.stopwords_en, &args.stopwords_es) {
        (None, None) => LanguageDetector::default(),
        (en, es) => {
            let load = |p: &Option<PathBuf>, builtin: &[&str]| -> Result<Vec<String>> {
                match p {
                    Some(p) => Ok(read_stopwords(open(p)?)?),
                    None => Ok(builtin.iter().map(|s| s.to_string()).collect()),
                }
            };
            let en = load(en, tweetinfo_core::annotate::language::ENGLISH_STOPWORDS)?;
            let es = load(es, tweetinfo_core::annotate::language::SPANISH_STOPWORDS)?;
            LanguageDetector::new(en.iter().map(String::as_str), es.iter().map(String::as_str))
        }
    };
    let annotator = Annotator::new(sentiment, language, bot_provider(&config)?);

    let input =
        File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let batch = ingest_source(input, args.format, args.source, &annotator)?;
    let corpus = ingest::merge(batch.records);

    let mut out = create(&args.out)?;
    ingest::write_corpus_jsonl(&corpus, &mut out)?;
    out.flush()?;
    let mut rejects = create(&args.rejects)?;
    ingest::write_rejects_jsonl(&batch.rejects, &mut rejects)?;
    rejects.flush()?;

    eprintln!(
        "{}: {} records written, {} rejected",
        args.input.display(),
        corpus.len(),
        batch.rejects.len()
    );
    Ok(())
}

fn read_corpora(paths: &[PathBuf]) -> Result<Corpus> {
    let mut records = Vec::new();
    for path in paths {
        let corpus = ingest::read_corpus_jsonl(open(path)?)
            .with_context(|| format!("reading {}", path.display()))?;
        records.extend(corpus.records);
    }
    Ok(ingest::merge(records))
}

fn load(paths: &[PathBuf], config: Option<&Path>) -> Result<()> {
    let config = Config::load(config)?;
    let location = config.storage()?;
    if location == tweetinfo_core::db::StorageLocation::Memory {
        bail!("store is `memory`; configure `store = \"sqlite:<path>\"` to persist a corpus");
    }
    let corpus = read_corpora(paths)?;
    let store = CorpusStore::open_location(&location)?;
    let report = store.bulk_load(&corpus)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn serve(config: Option<&Path>, corpora: &[PathBuf]) -> Result<()> {
    let config = Config::load(config)?;
    let state = tweetinfo_api::AppState::from_config(&config)?;
    if !corpora.is_empty() {
        let report = state.corpus.bulk_load(&read_corpora(corpora)?)?;
        tracing::info!(
            inserted = report.inserted,
            replaced = report.replaced,
            "corpus loaded"
        );
    }
    tokio::runtime::Runtime::new()?.block_on(tweetinfo_api::serve_state(&config, state))?;
    Ok(())
}

fn export(from: DateTime<Utc>, to: DateTime<Utc>, out: &Path, config: Option<&Path>) -> Result<()> {
    let config = Config::load(config)?;
    let store = open_event_store(&config.storage()?)?;
    let mut writer = create(out)?;
    let n = export_events(store.as_ref(), from, to, &mut writer)?;
    writer.flush()?;
    eprintln!("{n} events exported to {}", out.display());
    Ok(())
}

fn hash_password() -> Result<()> {
    let mut line = String::new();
    std::io::stdin().lock().read_line(&mut line)?;
    let password = line.trim_end_matches(['\r', '\n']);
    if password.is_empty() {
        bail!("empty password");
    }
    println!("{}", tweetinfo_core::auth::hash_password(password));
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Ingest(args) => ingest(args),
        Command::Load { corpus, config } => load(&corpus, config.as_deref()),
        Command::Serve { config, corpus } => serve(config.as_deref(), &corpus),
        Command::Events {
            command:
                EventsCommand::Export {
                    from,
                    to,
                    out,
                    config,
                },
        } => export(from, to, &out, config.as_deref()),
        Command::HashPassword => hash_password(),
    }
}
