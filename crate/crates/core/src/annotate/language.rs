//! Stopword-count language identification for English and Spanish.

use std::collections::HashSet;
use std::io::{self, BufRead};

use crate::annotate::sentiment::split_words;
use crate::model::Language;

// The two built-in lists are disjoint so a single word never counts for both.
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "the", "and", "is", "are", "was", "were", "of", "to", "in", "it", "that", "this", "with",
    "for", "on", "at", "by", "from", "i", "you", "we", "they", "she", "his", "her", "my", "your",
    "our", "their", "be", "been", "have", "has", "had", "do", "does", "did", "will", "would", "an",
    "or", "but", "if", "not", "what", "which", "who", "about",
];

pub const SPANISH_STOPWORDS: &[&str] = &[
    "el", "la", "los", "las", "un", "una", "unos", "unas", "y", "es", "son", "está", "están", "de",
    "del", "en", "que", "por", "para", "con", "sin", "su", "sus", "mi", "tu", "yo", "nosotros",
    "ellos", "ella", "pero", "como", "más", "muy", "ya", "lo", "le", "les", "este", "esta", "esto",
    "ese", "esa", "fue", "hay", "ser", "tiene", "cuando", "donde", "porque",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageDetector {
    english: HashSet<String>,
    spanish: HashSet<String>,
}

impl Default for LanguageDetector {
    fn default() -> Self {
        LanguageDetector::new(
            ENGLISH_STOPWORDS.iter().copied(),
            SPANISH_STOPWORDS.iter().copied(),
        )
    }
}

/// Reads a stopword file: one word per line, `#` comments allowed.
pub fn read_stopwords<R: BufRead>(input: R) -> io::Result<Vec<String>> {
    let mut words = Vec::new();
    for line in input.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            words.push(w.to_lowercase());
        }
    }
    Ok(words)
}

impl LanguageDetector {
    pub fn new<'a>(
        english: impl IntoIterator<Item = &'a str>,
        spanish: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        LanguageDetector {
            english: english.into_iter().map(str::to_lowercase).collect(),
            spanish: spanish.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn english(&self) -> &HashSet<String> {
        &self.english
    }

    pub fn spanish(&self) -> &HashSet<String> {
        &self.spanish
    }

    /// (english hits, spanish hits), counting repeated words each time.
    pub fn counts(&self, text: &str) -> (usize, usize) {
        let mut en = 0;
        let mut es = 0;
        for word in split_words(text) {
            let lower = word.to_lowercase();
            en += usize::from(self.english.contains(&lower));
            es += usize::from(self.spanish.contains(&lower));
        }
        (en, es)
    }

    /// Ties with at least one hit resolve to English.
    pub fn detect(&self, text: &str) -> Language {
        match self.counts(text) {
            (0, 0) => Language::Unknown,
            (en, es) if es > en => Language::Es,
            _ => Language::En,
        }
    }

    /// A hint of `en` or `es` wins over detection; anything else is ignored.
    pub fn detect_with_hint(&self, text: &str, hint: Option<&str>) -> Language {
        match hint.map(|h| h.trim().to_ascii_lowercase()).as_deref() {
            Some("en") => Language::En,
            Some("es") => Language::Es,
            _ => self.detect(text),
        }
    }
}
