//! Binary model file.
//!
//! ```text
//! "AZTX"            magic
//! u32               format version
//! u8                kind tag (0 nb, 1 svm, 2 mlp)
//! section x6        u64 byte length + payload:
//!                   vectorizer, vocabulary, idf, pipeline, class names, parameters
//! ```
//!
//! Integers are little-endian, reals IEEE-754 binary64, strings a u64 byte
//! length followed by UTF-8. Encoding is canonical: equal models produce
//! equal bytes.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::text::PipelineConfig;
use crate::vectorize::{IdfTable, Vectorizer, VectorizerKind, Vocabulary};

use super::{Activation, Classifier, MlpModel, ModelKind, NbModel, SvmModel, TrainedModel};

pub const MAGIC: [u8; 4] = *b"AZTX";
pub const FORMAT_VERSION: u32 = 1;

// idf log-base tag; only the natural log is defined.
const LOG_BASE_E: u8 = 0;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file: {0}")]
    Format(String),
    #[error("unsupported model format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("model file is truncated")]
    Truncated,
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    fs::write(path, encode_model(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, ModelIoError> {
    decode_model(&fs::read(path)?)
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bool(&mut self, v: bool) {
        self.u8(v as u8);
    }
    fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn strs<'a>(&mut self, items: impl ExactSizeIterator<Item = &'a String>) {
        self.usize(items.len());
        for s in items {
            self.str(s);
        }
    }
    fn f64s(&mut self, values: &[f64]) {
        self.usize(values.len());
        for &v in values {
            self.f64(v);
        }
    }
    fn section(&mut self, body: impl FnOnce(&mut Writer)) {
        let mut inner = Writer::default();
        body(&mut inner);
        self.usize(inner.buf.len());
        self.buf.extend_from_slice(&inner.buf);
    }
}

pub fn encode_model(model: &TrainedModel) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(&MAGIC);
    w.u32(model.format_version);
    w.u8(kind_tag(model.kind()));

    w.section(|w| {
        w.u8(match model.vectorizer.kind {
            VectorizerKind::Binary => 0,
            VectorizerKind::Count => 1,
            VectorizerKind::Tfidf => 2,
        })
    });
    w.section(|w| {
        let vocab = &model.vectorizer.vocabulary;
        w.u64(vocab.n_docs());
        w.strs(vocab.terms().iter());
        w.usize(vocab.len());
        for &df in vocab.document_frequencies() {
            w.u64(df);
        }
    });
    w.section(|w| {
        w.u8(LOG_BASE_E);
        match &model.vectorizer.idf {
            Some(idf) => {
                w.bool(true);
                w.f64s(idf.values());
            }
            None => w.bool(false),
        }
    });
    w.section(|w| {
        let p = &model.pipeline;
        w.strs(p.stopwords.iter());
        w.bool(p.stemming);
        w.strs(p.suffixes.iter());
        w.bool(p.keep_digits);
        w.usize(p.min_token_len);
    });
    w.section(|w| w.strs(model.class_names.iter()));
    w.section(|w| match &model.classifier {
        Classifier::Nb(m) => {
            w.f64(m.alpha);
            w.f64s(&m.log_priors);
            w.usize(m.log_likelihoods.len());
            for row in &m.log_likelihoods {
                w.f64s(row);
            }
        }
        Classifier::Svm(m) => {
            w.f64(m.lambda);
            w.usize(m.epochs);
            w.u64(m.seed);
            w.f64s(&m.biases);
            w.usize(m.weights.len());
            for row in &m.weights {
                w.f64s(row);
            }
        }
        Classifier::Mlp(m) => {
            w.u8(match m.activation {
                Activation::Tanh => 0,
                Activation::Logistic => 1,
            });
            w.u64(m.seed);
            w.usize(m.sizes.len());
            for &s in &m.sizes {
                w.usize(s);
            }
            w.f64s(&m.params);
        }
    });
    w.buf
}

fn kind_tag(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::Nb => 0,
        ModelKind::Svm => 1,
        ModelKind::Mlp => 2,
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

fn format_err<T>(msg: impl Into<String>) -> Result<T, ModelIoError> {
    Err(ModelIoError::Format(msg.into()))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelIoError> {
        if self.buf.len() < n {
            return Err(ModelIoError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, ModelIoError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, ModelIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, ModelIoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize, ModelIoError> {
        usize::try_from(self.u64()?).map_err(|_| ModelIoError::Format("length does not fit in memory".into()))
    }
    fn f64(&mut self) -> Result<f64, ModelIoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn bool(&mut self) -> Result<bool, ModelIoError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => format_err(format!("invalid boolean byte {other}")),
        }
    }
    // Count prefix for a sequence whose elements take at least `min_size`
    // bytes; rejects counts the remaining input cannot hold.
    fn count(&mut self, min_size: usize) -> Result<usize, ModelIoError> {
        let n = self.usize()?;
        if n.checked_mul(min_size).is_none_or(|bytes| bytes > self.buf.len()) {
            return Err(ModelIoError::Truncated);
        }
        Ok(n)
    }
    fn str(&mut self) -> Result<String, ModelIoError> {
        let n = self.usize()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| ModelIoError::Format("string is not valid UTF-8".into()))
    }
    fn strs(&mut self) -> Result<Vec<String>, ModelIoError> {
        let n = self.count(8)?;
        (0..n).map(|_| self.str()).collect()
    }
    fn f64s(&mut self) -> Result<Vec<f64>, ModelIoError> {
        let n = self.count(8)?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn section(&mut self) -> Result<Reader<'a>, ModelIoError> {
        let n = self.usize()?;
        Ok(Reader { buf: self.take(n)? })
    }
    fn finish(self, what: &str) -> Result<(), ModelIoError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            format_err(format!("{} unexpected trailing bytes in {what}", self.buf.len()))
        }
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel, ModelIoError> {
    if bytes.len() < MAGIC.len() {
        return if MAGIC.starts_with(bytes) { Err(ModelIoError::Truncated) } else { format_err("bad magic bytes") };
    }
    if bytes[..4] != MAGIC {
        return format_err("bad magic bytes");
    }
    let mut r = Reader { buf: &bytes[4..] };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(ModelIoError::Version { found: version, supported: FORMAT_VERSION });
    }
    let kind = match r.u8()? {
        0 => ModelKind::Nb,
        1 => ModelKind::Svm,
        2 => ModelKind::Mlp,
        other => return format_err(format!("unknown model kind tag {other}")),
    };

    let mut s = r.section()?;
    let vec_kind = match s.u8()? {
        0 => VectorizerKind::Binary,
        1 => VectorizerKind::Count,
        2 => VectorizerKind::Tfidf,
        other => return format_err(format!("unknown vectorizer tag {other}")),
    };
    s.finish("vectorizer section")?;

    let mut s = r.section()?;
    let n_docs = s.u64()?;
    let terms = s.strs()?;
    let n_df = s.count(8)?;
    let df = (0..n_df).map(|_| s.u64()).collect::<Result<Vec<_>, _>>()?;
    s.finish("vocabulary section")?;
    let vocabulary = Vocabulary::from_parts(terms, df, n_docs).map_err(ModelIoError::Format)?;

    let mut s = r.section()?;
    if s.u8()? != LOG_BASE_E {
        return format_err("unsupported idf log base");
    }
    let idf = if s.bool()? { Some(IdfTable::from_values(s.f64s()?)) } else { None };
    s.finish("idf section")?;
    match (&idf, vec_kind) {
        (Some(t), VectorizerKind::Tfidf) if t.len() == vocabulary.len() => {}
        (None, VectorizerKind::Binary | VectorizerKind::Count) => {}
        _ => return format_err("idf table does not match vectorizer"),
    }

    let mut s = r.section()?;
    let stopwords: BTreeSet<String> = s.strs()?.into_iter().collect();
    let stemming = s.bool()?;
    let suffixes = s.strs()?;
    let keep_digits = s.bool()?;
    let min_token_len = s.usize()?;
    s.finish("pipeline section")?;
    if min_token_len == 0 {
        return format_err("min_token_len must be >= 1");
    }
    let pipeline = PipelineConfig { stopwords, stemming, suffixes, keep_digits, min_token_len };

    let mut s = r.section()?;
    let class_names = s.strs()?;
    s.finish("class-name section")?;
    if class_names.is_empty() {
        return format_err("model has no classes");
    }
    if class_names.iter().collect::<BTreeSet<_>>().len() != class_names.len() {
        return format_err("duplicate class names");
    }

    let mut s = r.section()?;
    let (n_classes, dim) = (class_names.len(), vocabulary.len());
    let classifier = match kind {
        ModelKind::Nb => {
            let alpha = s.f64()?;
            let log_priors = s.f64s()?;
            let rows = s.count(8)?;
            let log_likelihoods = (0..rows).map(|_| s.f64s()).collect::<Result<Vec<_>, _>>()?;
            if log_priors.len() != n_classes || rows != n_classes || log_likelihoods.iter().any(|r| r.len() != dim) {
                return format_err("naive bayes parameter shape mismatch");
            }
            Classifier::Nb(NbModel { log_priors, log_likelihoods, alpha })
        }
        ModelKind::Svm => {
            let lambda = s.f64()?;
            let epochs = s.usize()?;
            let seed = s.u64()?;
            let biases = s.f64s()?;
            let rows = s.count(8)?;
            let weights = (0..rows).map(|_| s.f64s()).collect::<Result<Vec<_>, _>>()?;
            if biases.len() != n_classes || rows != n_classes || weights.iter().any(|r| r.len() != dim) {
                return format_err("svm parameter shape mismatch");
            }
            Classifier::Svm(SvmModel { weights, biases, lambda, epochs, seed })
        }
        ModelKind::Mlp => {
            let activation = match s.u8()? {
                0 => Activation::Tanh,
                1 => Activation::Logistic,
                other => return format_err(format!("unknown activation tag {other}")),
            };
            let seed = s.u64()?;
            let n_sizes = s.count(8)?;
            let sizes = (0..n_sizes).map(|_| s.usize()).collect::<Result<Vec<_>, _>>()?;
            if sizes.len() < 2 || sizes[0] != dim || sizes[sizes.len() - 1] != n_classes || sizes.contains(&0) {
                return format_err("mlp layer sizes do not match vocabulary and classes");
            }
            let expected = sizes
                .windows(2)
                .try_fold(0usize, |acc, w| w[0].checked_mul(w[1])?.checked_add(w[1])?.checked_add(acc));
            let params = s.f64s()?;
            if expected != Some(params.len()) {
                return format_err("mlp parameter count mismatch");
            }
            Classifier::Mlp(MlpModel { sizes, params, activation, seed })
        }
    };
    s.finish("parameter section")?;
    r.finish("model file")?;

    let vectorizer = Vectorizer { kind: vec_kind, vocabulary, idf };
    Ok(TrainedModel { classifier, vectorizer, pipeline, class_names, format_version: version })
}
