//! Vocabulary construction and binary / count / TF-IDF sparse vectors.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::Token;

#[derive(Debug, Error, PartialEq)]
pub enum VectorizeError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("no term reaches min_df = {0}")]
    EmptyVocabulary(u64),
    #[error("min_df must be at least 1")]
    InvalidMinDf,
    #[error("document has no in-vocabulary tokens")]
    EmptyDocument,
    #[error("vocabulary term {0:?} does not occur in the documents given to fit_idf")]
    VocabularyMismatch(String),
    #[error("invalid sparse vector: {0}")]
    InvalidVector(String),
}

/// Term to dense index map plus document frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<u64>,
    n_docs: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its stored parts (used by the model codec).
    pub fn from_parts(terms: Vec<String>, df: Vec<u64>, n_docs: u64) -> Result<Self, String> {
        if terms.len() != df.len() {
            return Err(format!("{} terms but {} df entries", terms.len(), df.len()));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(format!("term {t:?} listed twice"));
            }
        }
        if let Some(bad) = df.iter().position(|&d| d == 0 || d > n_docs) {
            return Err(format!("df {} of term {:?} outside 1..={n_docs}", df[bad], terms[bad]));
        }
        Ok(Vocabulary { terms, index, df, n_docs })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequencies(&self) -> &[u64] {
        &self.df
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.index_of(term).map(|i| self.df[i])
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }
}

/// Keeps terms with document frequency >= `min_df`; indices follow first
/// occurrence across the corpus.
pub fn build_vocabulary<D>(token_docs: &[D], min_df: u64) -> Result<Vocabulary, VectorizeError>
where
    D: AsRef<[Token]>,
{
    if min_df == 0 {
        return Err(VectorizeError::InvalidMinDf);
    }
    if token_docs.is_empty() {
        return Err(VectorizeError::EmptyCorpus);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut df: HashMap<&str, u64> = HashMap::new();
    for doc in token_docs {
        let mut seen: Vec<&str> = doc.as_ref().iter().map(Token::as_str).collect();
        // first-occurrence order must come from the unsorted stream
        for &t in &seen {
            if !df.contains_key(t) {
                df.insert(t, 0);
                order.push(t);
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.get_mut(t).expect("inserted above") += 1;
        }
    }
    let terms: Vec<String> = order.into_iter().filter(|t| df[t] >= min_df).map(str::to_owned).collect();
    if terms.is_empty() {
        return Err(VectorizeError::EmptyVocabulary(min_df));
    }
    let dfs = terms.iter().map(|t| df[t.as_str()]).collect();
    let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary { terms, index, df: dfs, n_docs: token_docs.len() as u64 })
}

/// Sorted `(index, value)` pairs with no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector::default()
    }

    /// Accepts entries in any order; duplicate indices are summed and zeros
    /// dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        SparseVector { entries }
    }

    /// Accepts only already-canonical entries.
    pub fn from_sorted(entries: Vec<(u32, f64)>) -> Result<Self, VectorizeError> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(VectorizeError::InvalidVector("indices not strictly increasing".into()));
            }
        }
        if entries.iter().any(|&(_, v)| v == 0.0 || !v.is_finite()) {
            return Err(VectorizeError::InvalidVector("zero or non-finite value".into()));
        }
        Ok(SparseVector { entries })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|&(i, v)| (i as usize, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(index as u32), |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    /// One past the largest stored index (0 when empty).
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i as usize + 1)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn scaled(&self, k: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, v)| (i, v * k)).collect())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Natural-log inverse document frequencies, one per vocabulary term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    values: Vec<f64>,
}

impl IdfTable {
    pub fn from_values(values: Vec<f64>) -> Self {
        IdfTable { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `idf(t) = ln(N / df(t))`, with N and df counted over `token_docs`.
pub fn fit_idf<D>(token_docs: &[D], vocab: &Vocabulary) -> Result<IdfTable, VectorizeError>
where
    D: AsRef<[Token]>,
{
    let mut df = vec![0u64; vocab.len()];
    let mut last_doc = vec![usize::MAX; vocab.len()];
    for (d, doc) in token_docs.iter().enumerate() {
        for t in doc.as_ref() {
            if let Some(i) = vocab.index_of(t.as_str()) {
                if last_doc[i] != d {
                    last_doc[i] = d;
                    df[i] += 1;
                }
            }
        }
    }
    let n = token_docs.len() as f64;
    let values = df
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d == 0 {
                Err(VectorizeError::VocabularyMismatch(vocab.terms[i].clone()))
            } else {
                Ok((n / d as f64).ln())
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(IdfTable { values })
}

fn term_counts(tokens: &[Token], vocab: &Vocabulary) -> Vec<(u32, f64)> {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_str()) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let mut pairs: Vec<(u32, f64)> = counts.into_iter().map(|(i, c)| (i as u32, c)).collect();
    pairs.sort_by_key(|&(i, _)| i);
    pairs
}

pub fn vectorize_binary(tokens: &[Token], vocab: &Vocabulary) -> SparseVector {
    let entries = term_counts(tokens, vocab).into_iter().map(|(i, _)| (i, 1.0)).collect();
    SparseVector { entries }
}

pub fn vectorize_count(tokens: &[Token], vocab: &Vocabulary) -> SparseVector {
    SparseVector { entries: term_counts(tokens, vocab) }
}

/// Raw term frequency (count over the in-vocabulary token total) times idf.
pub fn vectorize_tfidf(tokens: &[Token], vocab: &Vocabulary, idf: &IdfTable) -> Result<SparseVector, VectorizeError> {
    let counts = term_counts(tokens, vocab);
    let total: f64 = counts.iter().map(|&(_, c)| c).sum();
    if total == 0.0 {
        return Err(VectorizeError::EmptyDocument);
    }
    let entries = counts
        .into_iter()
        .map(|(i, c)| (i, c / total * idf.get(i as usize)))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    Ok(SparseVector { entries })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorizerKind {
    Binary,
    Count,
    #[default]
    Tfidf,
}

impl VectorizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VectorizerKind::Binary => "binary",
            VectorizerKind::Count => "count",
            VectorizerKind::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for VectorizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(VectorizerKind::Binary),
            "count" => Ok(VectorizerKind::Count),
            "tfidf" | "tf-idf" => Ok(VectorizerKind::Tfidf),
            other => Err(format!("unknown vectorizer {other:?} (expected binary, count or tfidf)")),
        }
    }
}

/// A fitted vectorizer: vocabulary plus, for TF-IDF, the idf table.
#[derive(Clone, Debug, PartialEq)]
pub struct Vectorizer {
    pub kind: VectorizerKind,
    pub vocabulary: Vocabulary,
    pub idf: Option<IdfTable>,
}

impl Vectorizer {
    pub fn fit<D>(kind: VectorizerKind, token_docs: &[D], min_df: u64) -> Result<Self, VectorizeError>
    where
        D: AsRef<[Token]>,
    {
        let vocabulary = build_vocabulary(token_docs, min_df)?;
        let idf = match kind {
            VectorizerKind::Tfidf => Some(fit_idf(token_docs, &vocabulary)?),
            _ => None,
        };
        Ok(Vectorizer { kind, vocabulary, idf })
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    /// Vectorizes one document. A TF-IDF document with no in-vocabulary
    /// tokens maps to the empty vector.
    pub fn transform(&self, tokens: &[Token]) -> SparseVector {
        match (self.kind, &self.idf) {
            (VectorizerKind::Binary, _) => vectorize_binary(tokens, &self.vocabulary),
            (VectorizerKind::Count, _) => vectorize_count(tokens, &self.vocabulary),
            (VectorizerKind::Tfidf, Some(idf)) => {
                vectorize_tfidf(tokens, &self.vocabulary, idf).unwrap_or_default()
            }
            (VectorizerKind::Tfidf, None) => unreachable!("tfidf vectorizer without idf table"),
        }
    }
}

/// Renders vectors as `(doc, index) value` lines, one per stored entry.
pub fn format_triplets<'a, I>(vectors: I) -> String
where
    I: IntoIterator<Item = &'a SparseVector>,
{
    let mut out = String::new();
    for (doc, v) in vectors.into_iter().enumerate() {
        for (i, value) in v.iter() {
            writeln!(out, "({doc}, {i}) {value}").expect("writing to a String");
        }
    }
    out
}
