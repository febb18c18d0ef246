//! Per-record meta-information: sentiment, language and bot likelihood.

pub mod bot;
pub mod language;
pub mod sentiment;

use std::sync::Arc;

pub use bot::{score_bot, BotAssessment, BotProvider, OfflineBotProvider, RemoteBotProvider};
pub use language::LanguageDetector;
pub use sentiment::{
    label_sentiment, normalize_sentiment, raw_sentiment, tokenize, ModifierWords,
    SentimentAnalyzer, SentimentLexicon, SentimentScore,
};

use crate::model::{BotStatus, TweetRecord};

/// Fills the annotation fields of normalized records.
#[derive(Clone)]
pub struct Annotator {
    pub sentiment: SentimentAnalyzer,
    pub language: LanguageDetector,
    provider: Arc<dyn BotProvider>,
}

impl Annotator {
    pub fn new(
        sentiment: SentimentAnalyzer,
        language: LanguageDetector,
        provider: Arc<dyn BotProvider>,
    ) -> Self {
        Annotator {
            sentiment,
            language,
            provider,
        }
    }

    /// Built-in lexicon and stopwords with the given provider.
    pub fn with_provider(provider: Arc<dyn BotProvider>) -> Self {
        Annotator::new(
            SentimentAnalyzer::default(),
            LanguageDetector::default(),
            provider,
        )
    }

    /// Idempotent: only text, the language hint, the author and a dataset
    /// bot score feed the computed fields.
    pub fn annotate(&self, mut record: TweetRecord) -> TweetRecord {
        let score = self.sentiment.score(&record.text);
        record.sentiment_compound = score.compound;
        record.sentiment_label = score.label;
        record.language = self
            .language
            .detect_with_hint(&record.text, record.language_hint.as_deref());

        if record.bot_status != BotStatus::Dataset {
            let assessment = match record.author.as_deref() {
                Some(handle) => score_bot(handle, self.provider.as_ref()),
                None => BotAssessment::unscored(),
            };
            record.bot_score = assessment.bot_score;
            record.is_bot = assessment.is_bot;
            record.bot_status = assessment.status;
        }
        record
    }

    pub fn annotate_all(&self, records: Vec<TweetRecord>) -> Vec<TweetRecord> {
        records.into_iter().map(|r| self.annotate(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{normalize, RawRecord};
    use crate::model::{Language, SentimentLabel, SourceTag};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn raw(text: &str) -> RawRecord {
        RawRecord {
            source_id: "1".into(),
            text: text.into(),
            label: "none".into(),
            fact_check_url: None,
            verified: None,
            bot_score: None,
            language_hint: None,
            author: Some("acct".into()),
        }
    }

    fn annotator(score: f64) -> Annotator {
        let provider = OfflineBotProvider::new(HashMap::from([("acct".to_string(), score)]));
        Annotator::with_provider(Arc::new(provider))
    }

    #[test]
    fn annotates_single_good_word() {
        let r = normalize(&raw("good"), SourceTag::HateDataset).unwrap();
        let out = annotator(0.0).annotate(r);
        assert!((out.sentiment_compound - 0.4404).abs() < 1e-4);
        assert_eq!(out.sentiment_label, SentimentLabel::Positive);
        assert_eq!(out.language, Language::Unknown);
        assert!(!out.is_bot);
        assert_eq!(out.bot_status, BotStatus::Provider);
        assert!(out.validate().is_ok());
    }

    #[test]
    fn language_hint_takes_precedence() {
        let mut r = raw("the cat and the dog is very good");
        r.language_hint = Some("es".into());
        let rec = normalize(&r, SourceTag::HateDataset).unwrap();
        assert_eq!(annotator(0.0).annotate(rec).language, Language::Es);
    }

    #[test]
    fn dataset_bot_score_beats_provider() {
        let mut r = raw("hello");
        r.bot_score = Some(0.2);
        let rec = normalize(&r, SourceTag::HateDataset).unwrap();
        let out = annotator(0.99).annotate(rec);
        assert_eq!(out.bot_score, 0.2);
        assert_eq!(out.bot_status, BotStatus::Dataset);
    }

    #[test]
    fn missing_author_is_unscored() {
        let mut r = raw("hello");
        r.author = None;
        let rec = normalize(&r, SourceTag::HateDataset).unwrap();
        let out = annotator(0.99).annotate(rec);
        assert_eq!(out.bot_status, BotStatus::Unscored);
        assert!(!out.is_bot);
    }

    proptest! {
        #[test]
        fn annotate_is_idempotent_and_preserves_identity(
            text in "[a-zA-Z !]{1,60}",
            score in proptest::option::of(0.0f64..=1.0),
            provider_score in 0.0f64..=1.0,
            hint in proptest::option::of(prop_oneof![Just("en"), Just("es"), Just("fr")]),
        ) {
            prop_assume!(!text.trim().is_empty());
            let mut r = raw(&text);
            r.bot_score = score;
            r.language_hint = hint.map(String::from);
            let rec = normalize(&r, SourceTag::HateDataset).unwrap();
            let a = annotator(provider_score);
            let once = a.annotate(rec.clone());
            let twice = a.annotate(once.clone());
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(&once.id, &rec.id);
            prop_assert_eq!(&once.text, &rec.text);
            prop_assert_eq!(once.category, rec.category);
            prop_assert_eq!(&once.fact_check_url, &rec.fact_check_url);
            prop_assert!(once.validate().is_ok());
        }
    }
}
