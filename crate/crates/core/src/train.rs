//! Corpus-level training and evaluation: analyze, vectorize, fit, score.

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::{
    train_mlp, train_nb, train_svm_ovr, ClassifyError, Classifier, LabeledDataset, MlpParams, ModelKind, SvmParams,
    TrainedModel,
};
use crate::corpus::Corpus;
use crate::evaluate::{confusion_matrix, metrics_from_matrix, EvalError, EvalReport};
use crate::text::{PipelineConfig, Token};
use crate::vectorize::{VectorizeError, Vectorizer, VectorizerKind};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("category {0:?} is not one of the model's classes")]
    UnknownLabel(String),
    #[error("alpha must be > 0, got {0}")]
    InvalidAlpha(f64),
}

/// Classifier choice together with its hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Nb { alpha: f64 },
    Svm(SvmParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Nb { .. } => ModelKind::Nb,
            ModelSpec::Svm(_) => ModelKind::Svm,
            ModelSpec::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Default hyperparameters for `kind`, seeded with `seed`.
    pub fn defaults(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::Nb => ModelSpec::Nb { alpha: 1.0 },
            ModelKind::Svm => ModelSpec::Svm(SvmParams { seed, ..SvmParams::default() }),
            ModelKind::Mlp => ModelSpec::Mlp(MlpParams { seed, ..MlpParams::default() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    pub model: ModelSpec,
    /// `None` picks count vectors for NB and TF-IDF otherwise.
    pub vectorizer: Option<VectorizerKind>,
    pub min_df: u64,
    pub pipeline: PipelineConfig,
}

impl TrainOptions {
    pub fn new(model: ModelSpec) -> Self {
        TrainOptions { model, vectorizer: None, min_df: 1, pipeline: PipelineConfig::default() }
    }

    pub fn with_vectorizer(mut self, kind: VectorizerKind) -> Self {
        self.vectorizer = Some(kind);
        self
    }

    pub fn vectorizer_kind(&self) -> VectorizerKind {
        self.vectorizer.unwrap_or(match self.model {
            ModelSpec::Nb { .. } => VectorizerKind::Count,
            _ => VectorizerKind::Tfidf,
        })
    }
}

/// Trains on `corpus` with classes taken from its own label set.
pub fn train_model(corpus: &Corpus, options: &TrainOptions) -> Result<TrainedModel, TrainError> {
    let class_names: Vec<String> = corpus.labels().iter().cloned().collect();
    train_model_with_classes(corpus, &class_names, options)
}

/// Trains with an explicit class list, e.g. the label set of the full
/// corpus before a split, so models from different splits agree on indices.
pub fn train_model_with_classes(
    corpus: &Corpus,
    class_names: &[String],
    options: &TrainOptions,
) -> Result<TrainedModel, TrainError> {
    if let ModelSpec::Nb { alpha } = options.model {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(TrainError::InvalidAlpha(alpha));
        }
    }
    let y = label_indices(corpus, class_names)?;
    let token_docs: Vec<Vec<Token>> = corpus.documents().par_iter().map(|d| options.pipeline.analyze(&d.body)).collect();
    let vectorizer = Vectorizer::fit(options.vectorizer_kind(), &token_docs, options.min_df)?;
    let x = token_docs.par_iter().map(|t| vectorizer.transform(t)).collect();
    let data = LabeledDataset::new(x, y, class_names.to_vec(), vectorizer.dim())?;

    let classifier = match &options.model {
        ModelSpec::Nb { alpha } => Classifier::Nb(train_nb(&data, *alpha)?),
        ModelSpec::Svm(p) => Classifier::Svm(train_svm_ovr(&data, p)?),
        ModelSpec::Mlp(p) => Classifier::Mlp(train_mlp(&data, p)?),
    };
    Ok(TrainedModel::new(classifier, vectorizer, options.pipeline.clone(), class_names.to_vec()))
}

fn label_indices(corpus: &Corpus, class_names: &[String]) -> Result<Vec<usize>, TrainError> {
    corpus
        .iter()
        .map(|d| {
            class_names
                .iter()
                .position(|c| *c == d.category)
                .ok_or_else(|| TrainError::UnknownLabel(d.category.clone()))
        })
        .collect()
}

/// Predicts every document of `corpus` and scores against its labels.
/// Documents with no analyzable text are classified from the empty vector.
pub fn evaluate_model(model: &TrainedModel, corpus: &Corpus) -> Result<EvalReport, TrainError> {
    let y_true = label_indices(corpus, &model.class_names)?;
    let y_pred: Vec<usize> = corpus
        .documents()
        .par_iter()
        .map(|d| model.predict_vector(&model.vectorize_text(&d.body)).class_index)
        .collect();
    let matrix = confusion_matrix(&y_true, &y_pred, &model.class_names)?;
    Ok(metrics_from_matrix(&matrix)?)
}
