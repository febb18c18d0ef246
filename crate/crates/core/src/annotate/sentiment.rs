//! Lexicon-based sentiment scoring.
//!
//! Each token found in the lexicon contributes its valence, adjusted by three
//! rules applied in order: a preceding booster word, all-caps emphasis, and a
//! preceding negator. The adjusted valences are summed, trailing exclamation
//! marks push the sum further from zero, and the sum is squashed into (-1, 1)
//! with `x / sqrt(x^2 + alpha)`.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use crate::model::SentimentLabel;

/// Normalization constant for the compound score.
pub const DEFAULT_ALPHA: f64 = 15.0;
pub const BOOSTER_INCREMENT: f64 = 0.293;
pub const CAPS_INCREMENT: f64 = 0.733;
pub const NEGATION_FACTOR: f64 = -0.74;
pub const EXCLAMATION_INCREMENT: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 3;
/// Compound scores at or beyond +/- this value are labelled positive/negative.
pub const LABEL_THRESHOLD: f64 = 0.05;

const MAX_VALENCE: f64 = 4.0;

// Largest f64 strictly below 1.0.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

const BUILTIN_LEXICON: &[(&str, f64)] = &[
    ("good", 1.9),
    ("bad", -2.5),
    ("great", 3.1),
    ("love", 3.2),
    ("hate", -2.7),
    ("happy", 2.7),
    ("sad", -2.1),
    ("terrible", -2.1),
    ("awful", -2.0),
    ("excellent", 2.7),
    ("nice", 1.8),
    ("wrong", -2.1),
    ("safe", 1.9),
    ("dangerous", -2.1),
    ("fake", -2.1),
    ("lie", -1.6),
    ("lies", -1.8),
    ("true", 1.8),
    ("hope", 1.9),
    ("fear", -2.2),
    ("angry", -2.3),
    ("disgusting", -2.4),
    ("stupid", -2.4),
    ("thanks", 1.9),
    ("wonderful", 2.7),
    ("worst", -3.1),
    ("best", 3.2),
    ("kill", -3.7),
    ("cure", 1.6),
    ("bueno", 1.9),
    ("malo", -2.5),
    ("excelente", 2.7),
    ("feliz", 2.7),
    ("triste", -2.1),
    ("odio", -2.7),
    ("amor", 3.2),
    ("peligroso", -2.1),
    ("falso", -2.1),
    ("mentira", -1.8),
];

const BUILTIN_NEGATORS: &[&str] = &[
    "not",
    "never",
    "no",
    "nor",
    "neither",
    "nobody",
    "nothing",
    "none",
    "cannot",
    "can't",
    "don't",
    "doesn't",
    "didn't",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "won't",
    "wouldn't",
    "shouldn't",
    "couldn't",
    "ain't",
    "without",
    "nunca",
    "jamás",
];

const BUILTIN_BOOSTERS: &[&str] = &[
    "very",
    "extremely",
    "really",
    "absolutely",
    "completely",
    "totally",
    "incredibly",
    "so",
    "super",
    "highly",
    "most",
    "utterly",
    "muy",
    "tan",
    "súper",
];

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SentimentError {
    #[error("OUT_OF_RANGE: compound score {0} outside [-1, 1]")]
    OutOfRange(f64),
}

/// Lowercase token to valence in [-4, 4].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    entries: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn builtin() -> Self {
        Self::from_entries(BUILTIN_LEXICON.iter().map(|(k, v)| (k.to_string(), *v)))
            .expect("built-in lexicon is valid")
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        for (i, (token, valence)) in entries.into_iter().enumerate() {
            check_entry(&token, valence).map_err(|reason| LexiconError::Malformed {
                line: i + 1,
                reason,
            })?;
            map.insert(token, valence);
        }
        Ok(SentimentLexicon { entries: map })
    }

    /// Parses `token<TAB>valence` lines. Extra tab-separated columns are
    /// ignored; blank lines and `#` comments are skipped. Tokens are lowercased.
    pub fn parse<R: BufRead>(input: R) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| LexiconError::Malformed {
                line: i + 1,
                reason,
            };
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default().trim().to_lowercase();
            let valence: f64 = cols
                .next()
                .ok_or_else(|| malformed("missing valence column".into()))?
                .trim()
                .parse()
                .map_err(|e| malformed(format!("bad valence: {e}")))?;
            check_entry(&token, valence).map_err(malformed)?;
            map.insert(token, valence);
        }
        Ok(SentimentLexicon { entries: map })
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn check_entry(token: &str, valence: f64) -> Result<(), String> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(format!("token `{token}` is empty or contains whitespace"));
    }
    if token.to_lowercase() != token {
        return Err(format!("token `{token}` is not lowercase"));
    }
    if !(-MAX_VALENCE..=MAX_VALENCE).contains(&valence) {
        return Err(format!("valence {valence} outside [-4, 4]"));
    }
    Ok(())
}

/// Negator and booster word lists, matched case-insensitively.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifierWords {
    negators: HashSet<String>,
    boosters: HashSet<String>,
}

impl Default for ModifierWords {
    fn default() -> Self {
        ModifierWords::new(
            BUILTIN_NEGATORS.iter().copied(),
            BUILTIN_BOOSTERS.iter().copied(),
        )
    }
}

impl ModifierWords {
    pub fn new<'a>(
        negators: impl IntoIterator<Item = &'a str>,
        boosters: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        ModifierWords {
            negators: negators.into_iter().map(str::to_lowercase).collect(),
            boosters: boosters.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn is_negator(&self, lower: &str) -> bool {
        self.negators.contains(lower)
    }

    pub fn is_booster(&self, lower: &str) -> bool {
        self.boosters.contains(lower)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Token with edge punctuation removed, original case.
    pub text: String,
    pub lower: String,
    pub all_caps: bool,
    pub preceded_by_negator: bool,
    pub preceded_by_booster: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedText {
    pub tokens: Vec<Token>,
    /// Length of the run of `!` at the end of the text (whitespace ignored).
    pub trailing_exclamations: usize,
}

impl TokenizedText {
    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lower.as_str()).collect()
    }
}

/// Splits on whitespace and trims punctuation from token edges.
pub(crate) fn split_words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
}

fn is_all_caps(word: &str) -> bool {
    word.chars().any(char::is_alphabetic) && !word.chars().any(char::is_lowercase)
}

pub fn tokenize(text: &str, modifiers: &ModifierWords) -> TokenizedText {
    let mut tokens: Vec<Token> = Vec::new();
    for word in split_words(text) {
        let lower = word.to_lowercase();
        let (negated, boosted) = match tokens.last() {
            Some(prev) => (
                modifiers.is_negator(&prev.lower),
                modifiers.is_booster(&prev.lower),
            ),
            None => (false, false),
        };
        tokens.push(Token {
            all_caps: is_all_caps(word),
            text: word.to_string(),
            lower,
            preceded_by_negator: negated,
            preceded_by_booster: boosted,
        });
    }
    let trailing_exclamations = text
        .trim_end()
        .chars()
        .rev()
        .take_while(|c| *c == '!')
        .count();
    TokenizedText {
        tokens,
        trailing_exclamations,
    }
}

/// Adjusted valence of one token, or `None` when it is not in the lexicon.
pub fn token_valence(token: &Token, lexicon: &SentimentLexicon) -> Option<f64> {
    let mut v = lexicon.get(&token.lower)?;
    let sign = v.signum();
    if token.preceded_by_booster {
        v += sign * BOOSTER_INCREMENT;
    }
    if token.all_caps {
        v += sign * CAPS_INCREMENT;
    }
    if token.preceded_by_negator {
        v *= NEGATION_FACTOR;
    }
    Some(v)
}

pub fn raw_sentiment(text: &TokenizedText, lexicon: &SentimentLexicon) -> f64 {
    let sum: f64 = text
        .tokens
        .iter()
        .filter_map(|t| token_valence(t, lexicon))
        .sum();
    if sum == 0.0 {
        return 0.0;
    }
    let bangs = text.trailing_exclamations.min(MAX_EXCLAMATIONS) as f64;
    sum + sum.signum() * EXCLAMATION_INCREMENT * bangs
}

/// Squashes a raw valence sum into (-1, 1).
///
/// Saturates at the largest `f64` below 1 in magnitude, so the open bound
/// holds for every finite input.
pub fn normalize_sentiment(raw_sum: f64, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "alpha must be positive, got {alpha}");
    if raw_sum == 0.0 {
        return 0.0;
    }
    // Rewritten to avoid overflowing raw_sum^2 for very large sums.
    let scaled = alpha / (raw_sum * raw_sum);
    let magnitude = if scaled.is_finite() {
        (1.0 / (1.0 + scaled)).sqrt()
    } else {
        raw_sum.abs() / alpha.sqrt()
    };
    raw_sum.signum() * magnitude.min(BELOW_ONE)
}

pub fn label_sentiment(compound: f64) -> Result<SentimentLabel, SentimentError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(SentimentError::OutOfRange(compound));
    }
    Ok(if compound >= LABEL_THRESHOLD {
        SentimentLabel::Positive
    } else if compound <= -LABEL_THRESHOLD {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScore {
    pub raw_sum: f64,
    pub compound: f64,
    pub label: SentimentLabel,
}

#[derive(Debug, Clone)]
pub struct SentimentAnalyzer {
    pub lexicon: SentimentLexicon,
    pub modifiers: ModifierWords,
    pub alpha: f64,
}

impl Default for SentimentAnalyzer {
    fn default() -> Self {
        SentimentAnalyzer::new(SentimentLexicon::builtin())
    }
}

impl SentimentAnalyzer {
    pub fn new(lexicon: SentimentLexicon) -> Self {
        SentimentAnalyzer {
            lexicon,
            modifiers: ModifierWords::default(),
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn score(&self, text: &str) -> SentimentScore {
        let tokens = tokenize(text, &self.modifiers);
        let raw_sum = raw_sentiment(&tokens, &self.lexicon);
        let compound = normalize_sentiment(raw_sum, self.alpha);
        let label = label_sentiment(compound).expect("normalized compound is within [-1, 1]");
        SentimentScore {
            raw_sum,
            compound,
            label,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture_lexicon() -> SentimentLexicon {
        SentimentLexicon::from_entries([
            ("good".to_string(), 1.9),
            ("bad".to_string(), -2.5),
            ("great".to_string(), 3.1),
        ])
        .unwrap()
    }

    fn fixture_modifiers() -> ModifierWords {
        ModifierWords::new(["not", "never", "no"], ["very", "extremely"])
    }

    fn raw(text: &str) -> f64 {
        raw_sentiment(&tokenize(text, &fixture_modifiers()), &fixture_lexicon())
    }

    #[test]
    fn tokenize_empty() {
        let t = tokenize("", &fixture_modifiers());
        assert!(t.tokens.is_empty());
        assert_eq!(t.trailing_exclamations, 0);
    }

    #[test]
    fn tokenize_flags() {
        let t = tokenize("not good", &fixture_modifiers());
        assert_eq!(t.words(), vec!["not", "good"]);
        assert!(t.tokens[1].preceded_by_negator);
        assert!(!t.tokens[0].preceded_by_negator);

        let t = tokenize("VERY GOOD", &fixture_modifiers());
        assert!(t.tokens[1].all_caps);
        assert!(t.tokens[1].preceded_by_booster);
    }

    #[test]
    fn tokenize_strips_edge_punctuation_and_counts_bangs() {
        let t = tokenize("(good), great!! \n", &fixture_modifiers());
        assert_eq!(t.words(), vec!["good", "great"]);
        assert_eq!(t.trailing_exclamations, 2);
        let t = tokenize("wow! ok", &fixture_modifiers());
        assert_eq!(t.trailing_exclamations, 0);
    }

    #[test]
    fn raw_sentiment_hand_values() {
        assert!((raw("good") - 1.9).abs() < 1e-12);
        assert!((raw("not good") - (-1.406)).abs() < 1e-12);
        assert!((raw("very good") - 2.193).abs() < 1e-12);
        assert_eq!(raw("nothing relevant here"), 0.0);
        // 1.9 + 0.733 caps
        assert!((raw("GOOD") - 2.633).abs() < 1e-12);
        // only the immediately preceding token modifies: "not" does not reach BAD
        assert!((raw("not VERY BAD") - (-3.526)).abs() < 1e-12);
        let t = tokenize("very BAD", &fixture_modifiers());
        let v = token_valence(&t.tokens[1], &fixture_lexicon()).unwrap();
        assert!((v - (-3.526)).abs() < 1e-12);
    }

    #[test]
    fn exclamations_capped_at_three() {
        assert!((raw("good!") - (1.9 + 0.292)).abs() < 1e-12);
        assert!((raw("good!!!!!") - (1.9 + 3.0 * 0.292)).abs() < 1e-12);
        assert!((raw("bad!!") - (-2.5 - 2.0 * 0.292)).abs() < 1e-12);
        assert_eq!(raw("meh!!!"), 0.0);
    }

    #[test]
    fn normalize_hand_values() {
        assert_eq!(normalize_sentiment(0.0, 15.0), 0.0);
        assert!((normalize_sentiment(1.9, 15.0) - 0.4404).abs() < 1e-4);
        assert!((normalize_sentiment(-2.5, 15.0) - (-0.5423)).abs() < 1e-4);
    }

    #[test]
    fn normalize_saturates_below_one() {
        for x in [1e9, 1e200, f64::MAX] {
            let c = normalize_sentiment(x, 15.0);
            assert!(c < 1.0 && c > 0.99, "{x} -> {c}");
            assert_eq!(normalize_sentiment(-x, 15.0), -c);
        }
    }

    #[test]
    #[should_panic(expected = "alpha must be positive")]
    fn normalize_rejects_non_positive_alpha() {
        normalize_sentiment(1.0, 0.0);
    }

    #[test]
    fn label_thresholds() {
        assert_eq!(label_sentiment(0.0).unwrap(), SentimentLabel::Neutral);
        assert_eq!(label_sentiment(0.4404).unwrap(), SentimentLabel::Positive);
        assert_eq!(label_sentiment(-0.05).unwrap(), SentimentLabel::Negative);
        assert_eq!(label_sentiment(0.05).unwrap(), SentimentLabel::Positive);
        assert_eq!(label_sentiment(0.049).unwrap(), SentimentLabel::Neutral);
        assert_eq!(label_sentiment(1.2), Err(SentimentError::OutOfRange(1.2)));
        assert!(label_sentiment(f64::NAN).is_err());
    }

    #[test]
    fn lexicon_file_parsing() {
        let text = "# comment\nGood\t1.9\t0.5\t[1,2]\nbad\t-2.5\n\n";
        let lex = SentimentLexicon::parse(text.as_bytes()).unwrap();
        assert_eq!(lex.get("good"), Some(1.9));
        assert_eq!(lex.len(), 2);
        assert!(SentimentLexicon::parse("x\t9.0\n".as_bytes()).is_err());
        assert!(SentimentLexicon::parse("x\n".as_bytes()).is_err());
        assert!(SentimentLexicon::parse("x\tabc\n".as_bytes()).is_err());
    }

    #[test]
    fn builtin_lexicon_matches_fixture_values() {
        let lex = SentimentLexicon::builtin();
        assert_eq!(lex.get("good"), Some(1.9));
        assert_eq!(lex.get("bad"), Some(-2.5));
        assert_eq!(lex.get("great"), Some(3.1));
        assert!(lex.iter().all(|(_, v)| (-4.0..=4.0).contains(&v)));
    }

    #[test]
    fn negating_any_entry_flips_compound_sign() {
        let analyzer = SentimentAnalyzer::default();
        for (token, valence) in analyzer.lexicon.iter() {
            if valence == 0.0 {
                continue;
            }
            let plain = analyzer.score(token).compound;
            let negated = analyzer.score(&format!("not {token}")).compound;
            assert!(plain * negated < 0.0, "{token}: {plain} vs {negated}");
        }
    }

    proptest! {
        #[test]
        fn normalize_is_odd_bounded_monotone(x in -1000.0f64..1000.0, y in -1000.0f64..1000.0) {
            let fx = normalize_sentiment(x, DEFAULT_ALPHA);
            prop_assert!(fx.abs() < 1.0);
            prop_assert_eq!(normalize_sentiment(-x, DEFAULT_ALPHA), -fx);
            if x < y {
                prop_assert!(fx < normalize_sentiment(y, DEFAULT_ALPHA));
            }
        }

        #[test]
        fn non_positive_sum_never_labelled_positive(x in -1e6f64..=0.0) {
            let label = label_sentiment(normalize_sentiment(x, DEFAULT_ALPHA)).unwrap();
            prop_assert_ne!(label, SentimentLabel::Positive);
        }

        #[test]
        fn text_without_lexicon_words_is_neutral(words in proptest::collection::vec("[qxz]{3,8}", 0..10)) {
            let text = words.join(" ");
            let score = SentimentAnalyzer::new(fixture_lexicon()).score(&text);
            prop_assert_eq!(score.raw_sum, 0.0);
            prop_assert_eq!(score.label, SentimentLabel::Neutral);
        }
    }
}
