//! Raw news corpus: CSV ingestion, deduplication, category merging, cleaning
//! and descriptive statistics.

mod clean;
mod scrub;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{clean_phase1, run_cleaning, CleanOptions, CleanReport, CleanThresholds, DropReason};
pub use scrub::{parse_rules, scrub_noise, scrub_text, ScrubRule, DEFAULT_RULES};
pub use stats::{corpus_stats, sentence_histogram, DistributionStats, SentenceHistogram, StatsReport};

/// Column names of the corpus CSV, in canonical write order.
pub const SCHEMA: [&str; 6] = ["id", "source", "published_at", "category", "title", "body"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("input file not found: {0}")]
    MissingFile(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: u64, reason: String },
    #[error("duplicate document id {id:?} at row {row}")]
    DuplicateId { id: String, row: u64 },
    #[error("invalid regex rule #{index}: {message}")]
    InvalidPattern { index: usize, message: String },
    #[error("malformed line {line} in category mapping: {reason}")]
    MalformedMapping { line: usize, reason: String },
    #[error("category {0:?} is not in the mapping")]
    UnknownCategory(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// One news article.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub source: String,
    pub published_at: String,
    pub category: String,
    pub title: String,
    pub body: String,
}

impl Document {
    /// Convenience constructor for tests and synthetic data.
    pub fn new(id: impl Into<String>, category: impl Into<String>, body: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            source: String::new(),
            published_at: String::new(),
            category: category.into(),
            title: String::new(),
            body: body.into(),
        }
    }

    /// Number of Unicode scalar values in the body, whitespace included.
    pub fn char_count(&self) -> usize {
        self.body.chars().count()
    }
}

/// Ordered documents plus the set of labels they carry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    labels: BTreeSet<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let labels = documents.iter().map(|d| d.category.clone()).collect();
        Corpus { documents, labels }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }
}

impl FromIterator<Document> for Corpus {
    fn from_iter<T: IntoIterator<Item = Document>>(iter: T) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CorpusError::MissingFile(path.display().to_string()),
        _ => CorpusError::Io(e),
    })?;
    read_csv(io::BufReader::new(file))
}

/// Parses RFC-4180 CSV whose header names exactly the [`SCHEMA`] columns, in
/// any order. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.byte_records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| CorpusError::Schema(format!("unreadable header: {e}")))?,
        None => return Err(CorpusError::Schema("missing header row".into())),
    };
    let columns = header_positions(&header)?;

    let mut documents = Vec::new();
    let mut seen_ids = HashSet::new();
    for (i, rec) in records.enumerate() {
        let row = i as u64 + 1;
        let rec = rec.map_err(|e| CorpusError::MalformedRow { row, reason: e.to_string() })?;
        if rec.len() != SCHEMA.len() {
            return Err(CorpusError::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", SCHEMA.len(), rec.len()),
            });
        }
        let field = |col: usize| -> Result<String, CorpusError> {
            let bytes = &rec[columns[col]];
            String::from_utf8(bytes.to_vec()).map_err(|_| CorpusError::MalformedRow {
                row,
                reason: format!("column {:?} is not valid UTF-8", SCHEMA[col]),
            })
        };
        let doc = Document {
            id: field(0)?,
            source: field(1)?,
            published_at: field(2)?,
            category: field(3)?,
            title: field(4)?,
            body: field(5)?,
        };
        if doc.id.is_empty() {
            return Err(CorpusError::MalformedRow { row, reason: "empty id".into() });
        }
        if doc.category.is_empty() {
            return Err(CorpusError::MalformedRow { row, reason: "empty category".into() });
        }
        if !seen_ids.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId { id: doc.id, row });
        }
        documents.push(doc);
    }
    Ok(Corpus::new(documents))
}

// Maps schema column i to its position in the file.
fn header_positions(header: &csv::ByteRecord) -> Result<[usize; 6], CorpusError> {
    let names: Vec<String> = header
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim_start_matches('\u{feff}').trim().to_owned())
        .collect();
    let mut positions = [usize::MAX; 6];
    for (pos, name) in names.iter().enumerate() {
        match SCHEMA.iter().position(|c| c == name) {
            Some(col) if positions[col] == usize::MAX => positions[col] = pos,
            Some(_) => return Err(CorpusError::Schema(format!("column {name:?} appears twice"))),
            None => return Err(CorpusError::Schema(format!("unexpected column {name:?}"))),
        }
    }
    let missing: Vec<&str> = SCHEMA
        .iter()
        .zip(positions)
        .filter(|(_, p)| *p == usize::MAX)
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(CorpusError::Schema(format!("missing column(s): {}", missing.join(", "))));
    }
    Ok(positions)
}

pub fn write_csv<W: Write>(corpus: &Corpus, writer: W) -> Result<(), CorpusError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| CorpusError::Io(io::Error::other(e));
    wtr.write_record(SCHEMA).map_err(to_io)?;
    for d in corpus {
        wtr.write_record([&d.id, &d.source, &d.published_at, &d.category, &d.title, &d.body])
            .map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let file = File::create(path)?;
    write_csv(corpus, io::BufWriter::new(file))
}

/// Drops documents whose body is byte-identical to an earlier one.
pub fn deduplicate(corpus: Corpus) -> (Corpus, usize) {
    let before = corpus.len();
    let mut seen: HashSet<String> = HashSet::with_capacity(before);
    let kept: Vec<Document> = corpus
        .into_documents()
        .into_iter()
        .filter(|d| seen.insert(d.body.clone()))
        .collect();
    let dropped = before - kept.len();
    (Corpus::new(kept), dropped)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePolicy {
    /// Unmapped labels are kept as they are.
    #[default]
    Passthrough,
    /// Every label must appear in the mapping.
    Strict,
}

/// Category relabeling table, `old -> new`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryMap(BTreeMap<String, String>);

impl CategoryMap {
    pub fn new(entries: BTreeMap<String, String>) -> Result<Self, CorpusError> {
        for (old, new) in &entries {
            if old.is_empty() || new.is_empty() {
                return Err(CorpusError::MalformedMapping {
                    line: 0,
                    reason: format!("empty label in {old:?} -> {new:?}"),
                });
            }
        }
        Ok(CategoryMap(entries))
    }

    /// Parses `old<TAB>new` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |reason: &str| CorpusError::MalformedMapping { line: i + 1, reason: reason.into() };
            let (old, new) = line.split_once('\t').ok_or_else(|| bad("expected old<TAB>new"))?;
            let (old, new) = (old.trim(), new.trim());
            if old.is_empty() || new.is_empty() || new.contains('\t') {
                return Err(bad("labels must be non-empty and tab-free"));
            }
            if entries.insert(old.to_owned(), new.to_owned()).is_some() {
                return Err(bad("label mapped twice"));
            }
        }
        Ok(CategoryMap(entries))
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.0.get(label).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn merge_categories(corpus: Corpus, mapping: &CategoryMap, policy: MergePolicy) -> Result<Corpus, CorpusError> {
    let mut docs = corpus.into_documents();
    for doc in &mut docs {
        match (mapping.get(&doc.category), policy) {
            (Some(new), _) => doc.category = new.to_owned(),
            (None, MergePolicy::Passthrough) => {}
            (None, MergePolicy::Strict) => return Err(CorpusError::UnknownCategory(doc.category.clone())),
        }
    }
    Ok(Corpus::new(docs))
}
