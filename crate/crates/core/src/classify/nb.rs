use crate::vectorize::SparseVector;

use super::{ClassifyError, LabeledDataset};

/// Multinomial Naive Bayes with additive smoothing.
#[derive(Clone, Debug, PartialEq)]
pub struct NbModel {
    pub log_priors: Vec<f64>,
    /// `log_likelihoods[c][t] = log P(t | c)`.
    pub log_likelihoods: Vec<Vec<f64>>,
    pub alpha: f64,
}

/// Fits class priors `n_c / n` and smoothed term likelihoods
/// `(count(t, c) + alpha) / (total(c) + alpha * V)`, treating vector values as
/// counts.
pub fn train_nb(data: &LabeledDataset, alpha: f64) -> Result<NbModel, ClassifyError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ClassifyError::InvalidHyperparameter(format!("alpha must be > 0, got {alpha}")));
    }
    data.ensure_trainable()?;
    if data.x.iter().flat_map(|v| v.iter()).any(|(_, v)| v < 0.0 || !v.is_finite()) {
        return Err(ClassifyError::InvalidDataset("Naive Bayes needs non-negative finite features".into()));
    }
    let n_classes = data.n_classes();
    let dim = data.dim;

    let mut term_counts = vec![vec![0.0f64; dim]; n_classes];
    for (x, &c) in data.x.iter().zip(&data.y) {
        for (t, v) in x.iter() {
            term_counts[c][t] += v;
        }
    }

    let n = data.len() as f64;
    let log_priors = data.class_counts().iter().map(|&nc| (nc as f64 / n).ln()).collect();
    let log_likelihoods = term_counts
        .into_iter()
        .map(|counts| {
            let total: f64 = counts.iter().sum();
            let denom = total + alpha * dim as f64;
            // log of the ratio, not a difference of logs: equal probabilities
            // then give bit-equal scores, so exact ties stay ties
            counts.into_iter().map(|k| ((k + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(NbModel { log_priors, log_likelihoods, alpha })
}

/// Unnormalized log-posterior per class:
/// `log P(c) + sum_t x[t] * log P(t | c)`.
pub fn predict_scores_nb(model: &NbModel, x: &SparseVector) -> Vec<f64> {
    model
        .log_priors
        .iter()
        .zip(&model.log_likelihoods)
        .map(|(&prior, ll)| prior + x.iter().map(|(t, v)| v * ll[t]).sum::<f64>())
        .collect()
}
