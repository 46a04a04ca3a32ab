//! Azerbaijani-aware text normalization and tokenization.
//!
//! Everything here is a pure function of its inputs. The analysis chain used
//! for both training and inference is [`PipelineConfig::analyze`]:
//! normalize, tokenize, drop stop words, then (optionally) stem.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Stop-word list shipped with the crate, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_az.txt");

/// Suffix table used by the opt-in stemmer, one suffix per line.
pub const DEFAULT_SUFFIXES: &str = include_str!("../data/suffixes_az.txt");

/// Stemming never strips a token below this many characters.
pub const MIN_STEM_CHARS: usize = 3;

/// A case-folded word unit. Never empty, never contains whitespace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    /// Builds a token from arbitrary text, folding case. Returns `None` when
    /// the text is empty or contains whitespace.
    pub fn new(text: &str) -> Option<Self> {
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Token(normalize(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Azerbaijani case folding: `İ` lowers to `i`, `I` lowers to dotless `ı`,
/// every other character takes its default Unicode lowercase mapping.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            c => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// How sentences are counted in a body of text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceMode {
    /// Number of `.` characters. Decimals such as `3.14` count as a sentence.
    #[default]
    DotCount,
    /// Each maximal run of `.`, `!`, `?` or `…` counts once.
    TerminatorRuns,
}

impl SentenceMode {
    pub fn count(self, text: &str) -> usize {
        match self {
            SentenceMode::DotCount => count_sentences(text),
            SentenceMode::TerminatorRuns => {
                let mut runs = 0;
                let mut in_run = false;
                for ch in text.chars() {
                    let term = matches!(ch, '.' | '!' | '?' | '…');
                    if term && !in_run {
                        runs += 1;
                    }
                    in_run = term;
                }
                runs
            }
        }
    }
}

/// Dot-count sentence statistic: the number of `.` characters.
pub fn count_sentences(text: &str) -> usize {
    text.bytes().filter(|&b| b == b'.').count()
}

/// Tokenizer, stop-word and stemming settings. Stored verbatim inside trained
/// models so inference reproduces the training-time analysis exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub stopwords: BTreeSet<String>,
    pub stemming: bool,
    /// Suffix table consulted when `stemming` is on, longest suffix first.
    pub suffixes: Vec<String>,
    pub keep_digits: bool,
    pub min_token_len: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stopwords: parse_word_list(DEFAULT_STOPWORDS).into_iter().collect(),
            stemming: false,
            suffixes: sort_suffixes(parse_word_list(DEFAULT_SUFFIXES)),
            keep_digits: false,
            min_token_len: 1,
        }
    }
}

impl PipelineConfig {
    /// A config with no stop words, no stemming, letters only.
    pub fn bare() -> Self {
        PipelineConfig {
            stopwords: BTreeSet::new(),
            stemming: false,
            suffixes: Vec::new(),
            keep_digits: false,
            min_token_len: 1,
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = words.into_iter().map(|w| normalize(w.as_ref())).collect();
        self
    }

    pub fn with_suffixes<I, S>(mut self, suffixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.suffixes = sort_suffixes(suffixes.into_iter().map(|s| normalize(s.as_ref())).collect());
        self
    }

    /// Runs the full analysis chain over raw text.
    pub fn analyze(&self, raw: &str) -> Vec<Token> {
        let normalized = normalize(raw);
        let tokens = tokenize(&normalized, self);
        let mut tokens = remove_stopwords(tokens, &self.stopwords);
        if self.stemming {
            for token in &mut tokens {
                *token = stem(token, &self.suffixes);
            }
        }
        tokens
    }
}

/// Splits normalized text into maximal runs of letters (and digits when
/// `keep_digits` is set), dropping runs shorter than `min_token_len` chars.
pub fn tokenize(text: &str, config: &PipelineConfig) -> Vec<Token> {
    let keep = |c: char| c.is_alphabetic() || (config.keep_digits && c.is_numeric());
    let min_len = config.min_token_len.max(1);
    let mut tokens = Vec::new();
    let mut start = None;
    let mut run_chars = 0usize;
    for (pos, ch) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        if pos < text.len() && keep(ch) {
            if start.is_none() {
                start = Some(pos);
                run_chars = 0;
            }
            run_chars += 1;
        } else if let Some(begin) = start.take() {
            if run_chars >= min_len {
                tokens.push(Token(normalize(&text[begin..pos])));
            }
        }
    }
    tokens
}

pub fn remove_stopwords(tokens: Vec<Token>, stopwords: &BTreeSet<String>) -> Vec<Token> {
    if stopwords.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t.as_str()))
        .collect()
}

/// Repeated longest-match suffix stripping. A suffix is only removed when at
/// least [`MIN_STEM_CHARS`] characters remain; stripping repeats until no
/// suffix applies, so the result is a fixed point.
pub fn stem(token: &Token, suffixes: &[String]) -> Token {
    let mut current = token.as_str();
    'strip: loop {
        let len = current.chars().count();
        for suffix in suffixes {
            let suffix_len = suffix.chars().count();
            if suffix_len == 0 || len < suffix_len + MIN_STEM_CHARS {
                continue;
            }
            if let Some(rest) = current.strip_suffix(suffix.as_str()) {
                current = rest;
                continue 'strip;
            }
        }
        break;
    }
    Token(current.to_owned())
}

/// Parses a newline-separated word list. Blank lines and `#` comments are
/// skipped; entries are normalized.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize)
        .collect()
}

fn sort_suffixes(mut suffixes: Vec<String>) -> Vec<String> {
    suffixes.retain(|s| !s.is_empty());
    suffixes.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b)));
    suffixes.dedup();
    suffixes
}
