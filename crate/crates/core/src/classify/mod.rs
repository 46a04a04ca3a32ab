//! Multinomial Naive Bayes, one-vs-rest linear SVM and a multi-layer
//! perceptron over sparse document vectors, plus the self-contained
//! [`TrainedModel`] used for inference.

mod codec;
mod lbfgs;
mod mlp;
mod nb;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{normalize, PipelineConfig};
use crate::vectorize::{SparseVector, Vectorizer};

pub use codec::{decode_model, encode_model, load_model, save_model, ModelIoError, FORMAT_VERSION, MAGIC};
pub use lbfgs::{minimize_lbfgs, LbfgsConfig, LbfgsOutcome};
pub use mlp::{loss_and_gradient, predict_mlp, train_mlp, Activation, MlpModel, MlpParams, Solver};
pub use nb::{predict_scores_nb, train_nb, NbModel};
pub use svm::{binary_objective, predict_svm, train_svm_ovr, SvmModel, SvmParams};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("loss became non-finite at iteration {0}")]
    NonFiniteLoss(usize),
    #[error("input text is empty after normalization")]
    EmptyInput,
}

/// Vectors, class indices and class names for training or evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub x: Vec<SparseVector>,
    pub y: Vec<usize>,
    pub class_names: Vec<String>,
    /// Feature dimension (vocabulary size).
    pub dim: usize,
}

impl LabeledDataset {
    pub fn new(x: Vec<SparseVector>, y: Vec<usize>, class_names: Vec<String>, dim: usize) -> Result<Self, ClassifyError> {
        if x.len() != y.len() {
            return Err(ClassifyError::InvalidDataset(format!("{} vectors but {} labels", x.len(), y.len())));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= class_names.len()) {
            return Err(ClassifyError::InvalidDataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| v.min_dim() > dim) {
            return Err(ClassifyError::InvalidDataset(format!(
                "feature index {} out of range for dimension {dim}",
                v.min_dim() - 1
            )));
        }
        Ok(LabeledDataset { x, y, class_names, dim })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Training needs at least two distinct classes present.
    pub fn ensure_trainable(&self) -> Result<(), ClassifyError> {
        let present = self.class_counts().iter().filter(|&&n| n > 0).count();
        if present < 2 {
            return Err(ClassifyError::DegenerateDataset(format!(
                "need at least 2 distinct classes, found {present}"
            )));
        }
        Ok(())
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Nb,
    Svm,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Svm => "svm",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb" => Ok(ModelKind::Nb),
            "svm" => Ok(ModelKind::Svm),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(format!("unknown model kind {other:?} (expected nb, svm or mlp)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classifier {
    Nb(NbModel),
    Svm(SvmModel),
    Mlp(MlpModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Nb(_) => ModelKind::Nb,
            Classifier::Svm(_) => ModelKind::Svm,
            Classifier::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Predicted class and per-class scores: log-posteriors for NB, decision
    /// values for SVM, probabilities for MLP.
    pub fn predict(&self, x: &SparseVector) -> (usize, Vec<f64>) {
        match self {
            Classifier::Nb(m) => {
                let scores = predict_scores_nb(m, x);
                (argmax(&scores), scores)
            }
            Classifier::Svm(m) => predict_svm(m, x),
            Classifier::Mlp(m) => predict_mlp(m, x),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Classifier::Nb(m) => m.log_priors.len(),
            Classifier::Svm(m) => m.biases.len(),
            Classifier::Mlp(m) => m.output_size(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Classifier::Nb(m) => m.log_likelihoods.first().map_or(0, Vec::len),
            Classifier::Svm(m) => m.weights.first().map_or(0, Vec::len),
            Classifier::Mlp(m) => m.input_size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class_index: usize,
    pub label: String,
    pub scores: Vec<f64>,
}

impl Prediction {
    pub fn top_score(&self) -> f64 {
        self.scores[self.class_index]
    }
}

/// Everything needed to go from raw text to a label.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub classifier: Classifier,
    pub vectorizer: Vectorizer,
    pub pipeline: PipelineConfig,
    pub class_names: Vec<String>,
    pub format_version: u32,
}

impl TrainedModel {
    pub fn new(classifier: Classifier, vectorizer: Vectorizer, pipeline: PipelineConfig, class_names: Vec<String>) -> Self {
        TrainedModel { classifier, vectorizer, pipeline, class_names, format_version: FORMAT_VERSION }
    }

    pub fn kind(&self) -> ModelKind {
        self.classifier.kind()
    }

    pub fn vectorize_text(&self, raw: &str) -> SparseVector {
        self.vectorizer.transform(&self.pipeline.analyze(raw))
    }

    pub fn predict_vector(&self, x: &SparseVector) -> Prediction {
        let (class_index, scores) = self.classifier.predict(x);
        Prediction { class_index, label: self.class_names[class_index].clone(), scores }
    }

    /// Analyzes `raw` with the stored pipeline, vectorizes it and classifies.
    /// Text with no known terms falls back to the empty vector (NB priors,
    /// SVM biases, MLP zero input).
    pub fn predict_text(&self, raw: &str) -> Result<Prediction, ClassifyError> {
        if normalize(raw).trim().is_empty() {
            return Err(ClassifyError::EmptyInput);
        }
        Ok(self.predict_vector(&self.vectorize_text(raw)))
    }
}
