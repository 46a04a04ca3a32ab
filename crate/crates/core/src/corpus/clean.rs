use serde::{Deserialize, Serialize};

use super::{deduplicate, merge_categories, scrub_noise, CategoryMap, Corpus, CorpusError, MergePolicy, ScrubRule};

/// Inclusive keep-bounds on body length and sentence count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanThresholds {
    pub min_chars: usize,
    pub max_chars: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
}

impl Default for CleanThresholds {
    fn default() -> Self {
        CleanThresholds { min_chars: 30, max_chars: 10_000, min_sentences: 3, max_sentences: 100 }
    }
}

impl CleanThresholds {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.min_chars > self.max_chars {
            return Err(CorpusError::InvalidThresholds(format!(
                "min_chars {} > max_chars {}",
                self.min_chars, self.max_chars
            )));
        }
        if self.min_sentences > self.max_sentences {
            return Err(CorpusError::InvalidThresholds(format!(
                "min_sentences {} > max_sentences {}",
                self.min_sentences, self.max_sentences
            )));
        }
        Ok(())
    }

    /// First failing rule, checked in the fixed order chars-low, chars-high,
    /// sentences-low, sentences-high.
    pub fn check(&self, chars: usize, sentences: usize) -> Option<DropReason> {
        if chars < self.min_chars {
            Some(DropReason::TooShortChars)
        } else if chars > self.max_chars {
            Some(DropReason::TooLongChars)
        } else if sentences < self.min_sentences {
            Some(DropReason::TooFewSentences)
        } else if sentences > self.max_sentences {
            Some(DropReason::TooManySentences)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropReason {
    TooShortChars,
    TooLongChars,
    TooFewSentences,
    TooManySentences,
}

/// Tally of what the cleaning stages removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub input_count: usize,
    pub dropped_duplicates: usize,
    pub dropped_too_short_chars: usize,
    pub dropped_too_long_chars: usize,
    pub dropped_too_few_sentences: usize,
    pub dropped_too_many_sentences: usize,
    pub output_count: usize,
}

impl CleanReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped_duplicates
            + self.dropped_too_short_chars
            + self.dropped_too_long_chars
            + self.dropped_too_few_sentences
            + self.dropped_too_many_sentences
    }

    /// `input_count == output_count + total_dropped()`.
    pub fn is_conserved(&self) -> bool {
        self.input_count == self.output_count + self.total_dropped()
    }

    fn record(&mut self, reason: DropReason) {
        match reason {
            DropReason::TooShortChars => self.dropped_too_short_chars += 1,
            DropReason::TooLongChars => self.dropped_too_long_chars += 1,
            DropReason::TooFewSentences => self.dropped_too_few_sentences += 1,
            DropReason::TooManySentences => self.dropped_too_many_sentences += 1,
        }
    }
}

/// Keeps documents whose character count and sentence count both fall inside
/// the thresholds. Character count is Unicode scalar values, whitespace
/// included.
pub fn clean_phase1<F>(
    corpus: Corpus,
    thresholds: &CleanThresholds,
    sentence_counter: F,
) -> Result<(Corpus, CleanReport), CorpusError>
where
    F: Fn(&str) -> usize,
{
    thresholds.validate()?;
    let mut report = CleanReport { input_count: corpus.len(), ..CleanReport::default() };
    let mut kept = Vec::with_capacity(corpus.len());
    for doc in corpus.into_documents() {
        match thresholds.check(doc.char_count(), sentence_counter(&doc.body)) {
            Some(reason) => report.record(reason),
            None => kept.push(doc),
        }
    }
    report.output_count = kept.len();
    Ok((Corpus::new(kept), report))
}

/// Everything [`run_cleaning`] needs besides the corpus.
#[derive(Clone, Debug)]
pub struct CleanOptions {
    pub thresholds: CleanThresholds,
    pub rules: Vec<ScrubRule>,
    pub mapping: Option<(CategoryMap, MergePolicy)>,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions {
            thresholds: CleanThresholds::default(),
            rules: super::scrub::default_rules(),
            mapping: None,
        }
    }
}

/// Full cleaning pass: deduplicate, threshold filter, regex scrub, then a
/// second deduplicate + threshold pass over the scrubbed bodies, and finally
/// the optional category merge. The second pass catches documents that
/// scrubbing shortened below the bounds or made identical, so running the
/// pipeline on its own output drops nothing.
pub fn run_cleaning<F>(corpus: Corpus, options: &CleanOptions, sentence_counter: F) -> Result<(Corpus, CleanReport), CorpusError>
where
    F: Fn(&str) -> usize,
{
    options.thresholds.validate()?;
    let input_count = corpus.len();

    let (corpus, dup_first) = deduplicate(corpus);
    let (corpus, first) = clean_phase1(corpus, &options.thresholds, &sentence_counter)?;
    let corpus = scrub_noise(corpus, &options.rules);
    let (corpus, dup_second) = deduplicate(corpus);
    let (corpus, second) = clean_phase1(corpus, &options.thresholds, &sentence_counter)?;
    let corpus = match &options.mapping {
        Some((map, policy)) => merge_categories(corpus, map, *policy)?,
        None => corpus,
    };

    let report = CleanReport {
        input_count,
        dropped_duplicates: dup_first + dup_second,
        dropped_too_short_chars: first.dropped_too_short_chars + second.dropped_too_short_chars,
        dropped_too_long_chars: first.dropped_too_long_chars + second.dropped_too_long_chars,
        dropped_too_few_sentences: first.dropped_too_few_sentences + second.dropped_too_few_sentences,
        dropped_too_many_sentences: first.dropped_too_many_sentences + second.dropped_too_many_sentences,
        output_count: corpus.len(),
    };
    debug_assert!(report.is_conserved());
    Ok((corpus, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::text::count_sentences;
    use proptest::prelude::*;

    fn one(body: &str) -> Corpus {
        Corpus::new(vec![Document::new("1", "c", body)])
    }

    #[test]
    fn short_body_dropped() {
        let body = "Qısa xəbər. Bir. İki. Üçü";
        assert_eq!(body.chars().count(), 25);
        let (out, report) = clean_phase1(one(body), &CleanThresholds::default(), count_sentences).unwrap();
        assert!(out.is_empty());
        assert_eq!(report.dropped_too_short_chars, 1);
    }

    #[test]
    fn ordinary_body_kept() {
        let body = format!("{}. ", "ş".repeat(48)).repeat(10);
        assert_eq!(count_sentences(&body), 10);
        assert_eq!(body.chars().count(), 500);
        let (out, report) = clean_phase1(one(&body), &CleanThresholds::default(), count_sentences).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(report.output_count, 1);
    }

    #[test]
    fn too_many_sentences_dropped() {
        let body = "Bəli. ".repeat(120);
        let (_, report) = clean_phase1(one(&body), &CleanThresholds::default(), count_sentences).unwrap();
        assert_eq!(report.dropped_too_many_sentences, 1);
    }

    #[test]
    fn boundaries_are_inclusive() {
        let t = CleanThresholds { min_chars: 5, max_chars: 10, min_sentences: 1, max_sentences: 2 };
        assert_eq!(t.check(5, 1), None);
        assert_eq!(t.check(10, 2), None);
        assert_eq!(t.check(4, 1), Some(DropReason::TooShortChars));
        assert_eq!(t.check(11, 0), Some(DropReason::TooLongChars));
        assert_eq!(t.check(7, 0), Some(DropReason::TooFewSentences));
        assert_eq!(t.check(7, 3), Some(DropReason::TooManySentences));
        // chars rule wins over sentence rule
        assert_eq!(t.check(2, 9), Some(DropReason::TooShortChars));
    }

    #[test]
    fn invalid_thresholds_rejected() {
        let t = CleanThresholds { min_chars: 10, max_chars: 5, ..CleanThresholds::default() };
        assert!(matches!(clean_phase1(one("x"), &t, count_sentences), Err(CorpusError::InvalidThresholds(_))));
    }

    #[test]
    fn pipeline_drops_what_scrubbing_shortens() {
        let url_heavy = format!("Mənbə. Bax. Oxu. https://example.com/{}", "a".repeat(60));
        let corpus = Corpus::new(vec![
            Document::new("1", "c", url_heavy),
            Document::new("2", "c", "Bu xəbər kifayət qədər uzundur. İkinci cümlə. Üçüncü cümlə."),
        ]);
        let (out, report) = run_cleaning(corpus, &CleanOptions::default(), count_sentences).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(report.dropped_too_short_chars, 1);
        assert!(report.is_conserved());
        let (again, second) = run_cleaning(out.clone(), &CleanOptions::default(), count_sentences).unwrap();
        assert_eq!(again, out);
        assert_eq!(second.total_dropped(), 0);
    }

    proptest! {
        #[test]
        fn phase1_idempotent_and_conserved(
            bodies in proptest::collection::vec("[a. ]{0,40}", 0..40),
            min_chars in 0usize..20, span in 0usize..30, min_s in 0usize..4, span_s in 0usize..6,
        ) {
            let t = CleanThresholds { min_chars, max_chars: min_chars + span, min_sentences: min_s, max_sentences: min_s + span_s };
            let corpus: Corpus = bodies.into_iter().enumerate().map(|(i, b)| Document::new(i.to_string(), "c", b)).collect();
            let (once, report) = clean_phase1(corpus, &t, count_sentences).unwrap();
            prop_assert!(report.is_conserved());
            let (twice, second) = clean_phase1(once.clone(), &t, count_sentences).unwrap();
            prop_assert_eq!(twice, once);
            prop_assert_eq!(second.total_dropped(), 0);
        }
    }
}
