use std::borrow::Cow;

use rayon::prelude::*;
use regex::Regex;

use super::{Corpus, CorpusError};

/// Rule file shipped with the crate (URLs and embedded script noise).
pub const DEFAULT_RULES: &str = include_str!("../../data/scrub_rules.v1.tsv");

/// A compiled `PATTERN -> REPLACEMENT` rewrite.
#[derive(Clone, Debug)]
pub struct ScrubRule {
    pub pattern: Regex,
    pub replacement: String,
}

impl ScrubRule {
    pub fn new(pattern: &str, replacement: impl Into<String>) -> Result<Self, regex::Error> {
        Ok(ScrubRule { pattern: Regex::new(pattern)?, replacement: replacement.into() })
    }
}

pub(crate) fn default_rules() -> Vec<ScrubRule> {
    parse_rules(DEFAULT_RULES).expect("shipped scrub rules compile")
}

/// Parses a rule file: one `PATTERN<TAB>REPLACEMENT` per line, replacement
/// defaulting to a single space when the tab is absent. Blank lines and lines
/// starting with `#` are skipped. `index` in errors is the 0-based rule number.
pub fn parse_rules(text: &str) -> Result<Vec<ScrubRule>, CorpusError> {
    let mut rules = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (pattern, replacement) = match line.split_once('\t') {
            Some((p, r)) => (p, r),
            None => (line, " "),
        };
        let rule = ScrubRule::new(pattern, replacement).map_err(|e| CorpusError::InvalidPattern {
            index: rules.len(),
            message: format!("line {}: {e}", line_no + 1),
        })?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Applies every rule in order. Bodies where at least one rule matched are
/// then whitespace-collapsed and trimmed; bodies with no match come back
/// byte-identical.
pub fn scrub_text<'a>(text: &'a str, rules: &[ScrubRule]) -> Cow<'a, str> {
    let mut current = Cow::Borrowed(text);
    let mut touched = false;
    for rule in rules {
        if let Cow::Owned(s) = rule.pattern.replace_all(&current, rule.replacement.as_str()) {
            current = Cow::Owned(s);
            touched = true;
        }
    }
    if touched {
        Cow::Owned(collapse_whitespace(&current))
    } else {
        current
    }
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Rewrites each document body with [`scrub_text`]. Documents whose body
/// becomes empty are kept.
pub fn scrub_noise(corpus: Corpus, rules: &[ScrubRule]) -> Corpus {
    if rules.is_empty() {
        return corpus;
    }
    let docs = corpus
        .into_documents()
        .into_par_iter()
        .map(|mut doc| {
            if let Cow::Owned(s) = scrub_text(&doc.body, rules) {
                doc.body = s;
            }
            doc
        })
        .collect();
    Corpus::new(docs)
}
