//! Train/test splitting, confusion matrices and classification metrics.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Document};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("test fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("y_true has {0} entries but y_pred has {1}")]
    LengthMismatch(usize, usize),
    #[error("class index {0} out of range for {1} classes")]
    ClassOutOfRange(usize, usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
}

/// Seeded shuffle then partition. In stratified mode each class contributes
/// `round(n_c * test_fraction)` test documents, at least one for classes with
/// two or more documents and never the whole class. Both halves keep the
/// corpus order.
pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64, stratified: bool) -> Result<(Corpus, Corpus), EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(test_fraction));
    }
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; corpus.len()];

    if stratified {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, d) in corpus.iter().enumerate() {
            by_class.entry(d.category.as_str()).or_default().push(i);
        }
        for members in by_class.values_mut() {
            members.shuffle(&mut rng);
            let n = members.len();
            let mut n_test = (n as f64 * test_fraction).round() as usize;
            if n >= 2 {
                n_test = n_test.clamp(1, n - 1);
            } else {
                n_test = 0;
            }
            for &i in &members[..n_test] {
                is_test[i] = true;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.shuffle(&mut rng);
        let n_test = (corpus.len() as f64 * test_fraction).round() as usize;
        for &i in &order[..n_test.min(corpus.len())] {
            is_test[i] = true;
        }
    }

    let (test, train): (Vec<(usize, &Document)>, Vec<(usize, &Document)>) =
        corpus.iter().enumerate().partition(|(i, _)| is_test[*i]);
    let collect = |part: Vec<(usize, &Document)>| part.into_iter().map(|(_, d)| d.clone()).collect::<Corpus>();
    Ok((collect(train), collect(test)))
}

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(class_names: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        ConfusionMatrix { class_names, counts }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

/// Bracketed integer grid, one row per line, columns right-aligned.
impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.counts.iter().flatten().map(|v| v.to_string().len()).max().unwrap_or(1);
        for (r, row) in self.counts.iter().enumerate() {
            f.write_str(if r == 0 { "[[" } else { " [" })?;
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{v:>width$}")?;
            }
            f.write_str(if r + 1 == self.counts.len() { "]]" } else { "]\n" })?;
        }
        Ok(())
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], class_names: &[String]) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let n = class_names.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n || p >= n {
            return Err(EvalError::ClassOutOfRange(t.max(p), n));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { class_names: class_names.to_vec(), counts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub matrix: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, per-class precision/recall/F1 and unweighted macro averages.
/// Any 0/0 is reported as 0.
pub fn metrics_from_matrix(matrix: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    let total = matrix.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let per_class: Vec<ClassMetrics> = (0..matrix.n_classes())
        .map(|c| {
            let tp = matrix.counts[c][c];
            let precision = ratio(tp, matrix.column_sum(c));
            let recall = ratio(tp, matrix.row_sum(c));
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics {
                label: matrix.class_names.get(c).cloned().unwrap_or_else(|| c.to_string()),
                precision,
                recall,
                f1,
                support: matrix.row_sum(c),
            }
        })
        .collect();
    let k = per_class.len().max(1) as f64;
    Ok(EvalReport {
        accuracy: ratio(matrix.trace(), total),
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
        matrix: matrix.clone(),
    })
}
