use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError};

/// Summary of one per-document distribution, laid out like a pandas
/// `describe()` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

impl DistributionStats {
    /// Sample standard deviation (n - 1 divisor, 0 when n <= 1) and
    /// linearly interpolated percentiles. `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(DistributionStats {
            count: n,
            mean,
            std,
            min: sorted[0],
            p25: percentile_sorted(&sorted, 0.25),
            p50: percentile_sorted(&sorted, 0.50),
            p75: percentile_sorted(&sorted, 0.75),
            max: sorted[n - 1],
        })
    }
}

// Linear interpolation between closest ranks: position q * (n - 1).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Sentence-count and character-count distributions over a corpus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub sentences: DistributionStats,
    pub characters: DistributionStats,
    pub total_sentences: u64,
    pub total_characters: u64,
}

pub fn corpus_stats<F>(corpus: &Corpus, sentence_counter: F) -> Result<StatsReport, CorpusError>
where
    F: Fn(&str) -> usize,
{
    let sentences: Vec<f64> = corpus.iter().map(|d| sentence_counter(&d.body) as f64).collect();
    let characters: Vec<f64> = corpus.iter().map(|d| d.char_count() as f64).collect();
    let (Some(s), Some(c)) = (DistributionStats::from_values(&sentences), DistributionStats::from_values(&characters))
    else {
        return Err(CorpusError::EmptyCorpus);
    };
    Ok(StatsReport {
        sentences: s,
        characters: c,
        total_sentences: sentences.iter().map(|&v| v as u64).sum(),
        total_characters: characters.iter().map(|&v| v as u64).sum(),
    })
}

/// Documents per exact sentence count, with everything at or above
/// `max_bucket` pooled into the last slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceHistogram {
    pub max_bucket: usize,
    /// `counts[k]` for `k < max_bucket` is the exact-k count; `counts[max_bucket]`
    /// is the overflow bucket.
    pub counts: Vec<u64>,
}

impl SentenceHistogram {
    pub fn exact(&self, k: usize) -> u64 {
        if k < self.max_bucket {
            self.counts[k]
        } else {
            0
        }
    }

    pub fn overflow(&self) -> u64 {
        self.counts[self.max_bucket]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn sentence_histogram<F>(corpus: &Corpus, sentence_counter: F, max_bucket: usize) -> SentenceHistogram
where
    F: Fn(&str) -> usize,
{
    let max_bucket = max_bucket.max(1);
    let mut counts = vec![0u64; max_bucket + 1];
    for doc in corpus {
        counts[sentence_counter(&doc.body).min(max_bucket)] += 1;
    }
    SentenceHistogram { max_bucket, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::text::count_sentences;

    fn corpus_with_sentences(counts: &[usize]) -> Corpus {
        counts
            .iter()
            .enumerate()
            .map(|(i, &k)| Document::new(i.to_string(), "c", "a.".repeat(k)))
            .collect()
    }

    #[test]
    fn two_four_six() {
        let report = corpus_stats(&corpus_with_sentences(&[2, 4, 6]), count_sentences).unwrap();
        let s = report.sentences;
        assert_eq!((s.mean, s.std, s.min, s.p25, s.p50, s.p75, s.max), (4.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        assert_eq!(report.total_sentences, 12);
        assert_eq!(report.total_characters, 24);
    }

    #[test]
    fn single_document() {
        let s = corpus_stats(&corpus_with_sentences(&[7]), count_sentences).unwrap().sentences;
        assert_eq!(s.std, 0.0);
        assert_eq!([s.min, s.p25, s.p50, s.p75, s.max], [7.0; 5]);
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(matches!(corpus_stats(&Corpus::default(), count_sentences), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn table_shaped_json() {
        let report = corpus_stats(&corpus_with_sentences(&[1, 2]), count_sentences).unwrap();
        let v = serde_json::to_value(report).unwrap();
        for key in ["count", "mean", "std", "min", "p25", "p50", "p75", "max"] {
            assert!(v["sentences"].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn histogram_buckets() {
        let h = sentence_histogram(&corpus_with_sentences(&[1, 1, 2, 5]), count_sentences, 4);
        assert_eq!(h.counts, [0, 2, 1, 0, 1]);
        assert_eq!((h.exact(1), h.exact(2), h.exact(3), h.overflow()), (2, 1, 0, 1));
        let empty = sentence_histogram(&Corpus::default(), count_sentences, 4);
        assert_eq!(empty.total(), 0);
        assert!(empty.counts.iter().all(|&c| c == 0));
    }
}
