//! Seeded synthetic corpora for benchmarks and sanity checks.
//!
//! Words are generated pseudo-words built from Azerbaijani syllables, so
//! they survive tokenization and never collide with the shipped stop words.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};

pub const CATEGORIES: [&str; 6] = ["idman", "siyasət", "iqtisadiyyat", "mədəniyyət", "texnologiya", "səhiyyə"];

/// Seed of the shipped overlapping benchmark.
pub const BENCHMARK_SEED: u64 = 2024;

const SYLLABLES: [&str; 24] = [
    "ka", "zu", "mə", "qo", "ri", "xa", "lü", "tö", "nə", "vi", "şa", "ğu", "pe", "cı", "bo", "fə", "da", "jo", "sü",
    "hi", "gə", "yu", "lo", "ça",
];

/// `count` distinct pseudo-words; word `i` of pool `pool` is the same for
/// every seed.
fn word_pool(pool: usize, count: usize) -> Vec<String> {
    (0..count)
        .map(|i| {
            let n = pool * 10_000 + i;
            let mut w = String::from("zx");
            let mut k = n;
            for _ in 0..4 {
                w.push_str(SYLLABLES[k % SYLLABLES.len()]);
                k /= SYLLABLES.len();
            }
            w
        })
        .collect()
}

/// Builds a body of sentences of 6–12 words each.
fn render(words: Vec<&str>, rng: &mut ChaCha8Rng) -> String {
    let mut body = String::new();
    let mut left = 0usize;
    for (i, w) in words.iter().enumerate() {
        if left == 0 {
            if i > 0 {
                body.push_str(". ");
            }
            left = rng.random_range(6..=12);
        } else {
            body.push(' ');
        }
        body.push_str(w);
        left -= 1;
    }
    body.push('.');
    body
}

// Zipf-like pick: lower indices are more frequent.
fn zipf_pick<'a>(pool: &'a [String], rng: &mut ChaCha8Rng) -> &'a str {
    let u: f64 = rng.random();
    let i = ((pool.len() as f64).powf(u) - 1.0) as usize;
    &pool[i.min(pool.len() - 1)]
}

/// Knobs of the overlapping benchmark generator.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub n_docs: usize,
    pub keywords_per_class: usize,
    pub background_words: usize,
    /// Probability that a token of a regular article comes from its own class pool.
    pub own_rate: f64,
    /// Probability that a token comes from a random other class pool.
    pub cross_rate: f64,
    /// Fraction of documents that are long digests mixing all topics.
    pub digest_rate: f64,
    /// Probability that a digest token comes from the digest's own class.
    pub digest_own_rate: f64,
    pub article_len: (usize, usize),
    pub digest_len: (usize, usize),
    /// Fraction of labels replaced by a uniformly random class.
    pub label_noise: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            n_docs: 3000,
            keywords_per_class: 60,
            background_words: 400,
            own_rate: 0.12,
            cross_rate: 0.10,
            digest_rate: 0.25,
            digest_own_rate: 0.05,
            article_len: (20, 40),
            digest_len: (300, 600),
            label_noise: 0.0,
        }
    }
}

/// Six classes with overlapping keyword distributions, background noise and
/// a share of long multi-topic digests.
pub fn overlapping_benchmark(seed: u64) -> Corpus {
    overlapping_benchmark_with(&BenchmarkConfig::default(), seed)
}

pub fn overlapping_benchmark_with(config: &BenchmarkConfig, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pools: Vec<Vec<String>> = (0..CATEGORIES.len()).map(|c| word_pool(c, config.keywords_per_class)).collect();
    let background = word_pool(CATEGORIES.len(), config.background_words);

    let docs = (0..config.n_docs)
        .map(|i| {
            let class = i % CATEGORIES.len();
            let digest = rng.random_bool(config.digest_rate);
            let (len_range, own) = if digest {
                (config.digest_len, config.digest_own_rate)
            } else {
                (config.article_len, config.own_rate)
            };
            let len = rng.random_range(len_range.0..=len_range.1);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < own {
                        zipf_pick(&pools[class], &mut rng)
                    } else if u < own + config.cross_rate || digest {
                        let other = rng.random_range(0..CATEGORIES.len());
                        zipf_pick(&pools[other], &mut rng)
                    } else {
                        zipf_pick(&background, &mut rng)
                    }
                })
                .collect();
            let label = if rng.random_bool(config.label_noise) {
                *CATEGORIES.choose(&mut rng).expect("non-empty")
            } else {
                CATEGORIES[class]
            };
            let mut doc = Document::new(format!("bench-{i:05}"), label, render(words, &mut rng));
            doc.source = "synthetic".into();
            doc.title = format!("{label} {i}");
            doc
        })
        .collect();
    Corpus::new(docs)
}

/// Six classes whose keyword pools are disjoint, plus shared filler: every
/// document is unambiguous.
pub fn separable_fixture(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pools: Vec<Vec<String>> = (0..CATEGORIES.len()).map(|c| word_pool(c, 25)).collect();
    let filler = word_pool(CATEGORIES.len(), 50);
    let docs = (0..600)
        .map(|i| {
            let class = i % CATEGORIES.len();
            let len = rng.random_range(12..=30);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.6) {
                        pools[class].choose(&mut rng).expect("non-empty").as_str()
                    } else {
                        filler.choose(&mut rng).expect("non-empty").as_str()
                    }
                })
                .collect();
            let mut doc = Document::new(format!("sep-{i:04}"), CATEGORIES[class], render(words, &mut rng));
            doc.source = "synthetic".into();
            doc
        })
        .collect();
    Corpus::new(docs)
}

/// Fifty articles for exercising the cleaning stages: 40 clean ones, 3 that
/// break a threshold (too short, too few sentences, too many sentences) and
/// 7 exact copies of earlier clean bodies, interleaved. Bodies contain no
/// scrub-rule matches.
pub fn cleaning_fixture() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let words = word_pool(0, 80);
    let sentence = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(4..=8);
        (0..n).map(|_| words.choose(rng).expect("non-empty").as_str()).collect::<Vec<_>>().join(" ") + "."
    };
    let article = |rng: &mut ChaCha8Rng, sentences: usize| (0..sentences).map(|_| sentence(rng)).collect::<Vec<_>>().join(" ");

    let mut bodies: Vec<String> = (0..40)
        .map(|_| {
            let n = rng.random_range(3..=12);
            article(&mut rng, n)
        })
        .collect();
    bodies.insert(5, "Qısa xəbər. Bir. İki.".to_string());
    bodies.insert(17, format!("{} {}", sentence(&mut rng), sentence(&mut rng)));
    bodies.insert(29, article(&mut rng, 120));
    for (at, from) in [(3, 0), (11, 2), (20, 9), (26, 14), (34, 1), (41, 30), (47, 40)] {
        let copy = bodies[from].clone();
        bodies.insert(at, copy);
    }
    let docs = bodies
        .into_iter()
        .enumerate()
        .map(|(i, body)| {
            let mut doc = Document::new(format!("clean-{i:02}"), CATEGORIES[i % 3], body);
            doc.source = "fixture".into();
            doc.published_at = format!("2019-03-{:02}T10:00:00", i % 28 + 1);
            doc.title = format!("Xəbər {i}");
            doc
        })
        .collect();
    Corpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::PipelineConfig;

    #[test]
    fn deterministic() {
        assert_eq!(overlapping_benchmark(1), overlapping_benchmark(1));
        assert_ne!(overlapping_benchmark(1), overlapping_benchmark(2));
        assert_eq!(separable_fixture(3), separable_fixture(3));
    }

    #[test]
    fn shapes() {
        let bench = overlapping_benchmark(BENCHMARK_SEED);
        assert_eq!(bench.len(), 3000);
        assert_eq!(bench.labels().len(), 6);
        let sep = separable_fixture(0);
        assert_eq!(sep.len(), 600);
        assert_eq!(cleaning_fixture().len(), 50);
        for c in CATEGORIES {
            assert_eq!(sep.iter().filter(|d| d.category == c).count(), 100);
        }
    }

    #[test]
    fn words_survive_the_pipeline() {
        let pipeline = PipelineConfig::default();
        let corpus = separable_fixture(0);
        let body = &corpus.documents()[0].body;
        let raw_words = body.split_whitespace().count();
        assert_eq!(pipeline.analyze(body).len(), raw_words);
    }

    #[test]
    fn pools_are_distinct() {
        let mut all: Vec<String> = (0..7).flat_map(|p| word_pool(p, 400)).collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
    }
}
