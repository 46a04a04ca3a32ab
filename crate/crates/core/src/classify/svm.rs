use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::vectorize::SparseVector;

use super::{argmax, ClassifyError, LabeledDataset};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-4, epochs: 20, seed: 0 }
    }
}

/// One linear separator per class (one-vs-rest).
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// Trains `C` binary hinge-loss separators, class `c` against the rest.
///
/// Each binary problem runs projected stochastic subgradient descent with
/// step `1 / (lambda * t)` over a seeded per-epoch shuffle; class `c` uses
/// seed `seed + c`. The bias is learned as the weight of a constant feature,
/// so it is regularized and projected along with `w`.
pub fn train_svm_ovr(data: &LabeledDataset, params: &SvmParams) -> Result<SvmModel, ClassifyError> {
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(ClassifyError::InvalidHyperparameter(format!("lambda must be > 0, got {}", params.lambda)));
    }
    if params.epochs == 0 {
        return Err(ClassifyError::InvalidHyperparameter("epochs must be >= 1".into()));
    }
    data.ensure_trainable()?;

    let sq_norms: Vec<f64> = data.x.iter().map(|x| x.squared_norm() + 1.0).collect();
    let separators: Vec<(Vec<f64>, f64)> = (0..data.n_classes())
        .into_par_iter()
        .map(|class| train_binary(data, &sq_norms, class, params))
        .collect();
    let (weights, biases) = separators.into_iter().unzip();
    Ok(SvmModel { weights, biases, lambda: params.lambda, epochs: params.epochs, seed: params.seed })
}

// w is held as scale * v so the per-step shrink is O(1). v[dim] is the bias
// coordinate (constant feature 1.0).
fn train_binary(data: &LabeledDataset, sq_norms: &[f64], class: usize, params: &SvmParams) -> (Vec<f64>, f64) {
    let dim = data.dim;
    let lambda = params.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(class as u64));
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut v = vec![0.0f64; dim + 1];
    let mut scale = 1.0f64;
    let mut v_sq = 0.0f64;
    let mut t = 0u64;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = &data.x[i];
            let y = if data.y[i] == class { 1.0 } else { -1.0 };
            let eta = 1.0 / (lambda * t as f64);
            let v_dot_x = x.dot(&v[..dim]) + v[dim];
            let margin = y * scale * v_dot_x;

            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                v_sq = 0.0;
                scale = 1.0;
            } else {
                scale *= shrink;
            }

            if margin < 1.0 {
                let a = eta * y / scale;
                // v_dot_x is stale after a reset, but then v was zero anyway
                let vx = if v_sq == 0.0 { 0.0 } else { v_dot_x };
                for (j, xj) in x.iter() {
                    v[j] += a * xj;
                }
                v[dim] += a;
                v_sq += 2.0 * a * vx + a * a * sq_norms[i];
            }

            let norm = scale * v_sq.max(0.0).sqrt();
            if norm > radius {
                scale *= radius / norm;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                v_sq = v.iter().map(|w| w * w).sum();
                scale = 1.0;
            }
        }
        // refresh the running norm to stop drift
        v_sq = v.iter().map(|w| w * w).sum();
    }

    let bias = scale * v[dim];
    v.truncate(dim);
    v.iter_mut().for_each(|w| *w *= scale);
    (v, bias)
}

/// Decision values `w_c . x + b_c` and their argmax.
pub fn predict_svm(model: &SvmModel, x: &SparseVector) -> (usize, Vec<f64>) {
    let decisions: Vec<f64> = model.weights.iter().zip(&model.biases).map(|(w, b)| x.dot(w) + b).collect();
    (argmax(&decisions), decisions)
}

/// Regularized hinge objective of one binary separator, class `positive`
/// against the rest: `lambda/2 (|w|^2 + b^2) + mean hinge`.
pub fn binary_objective(weights: &[f64], bias: f64, lambda: f64, data: &LabeledDataset, positive: usize) -> f64 {
    let reg = 0.5 * lambda * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
    let hinge: f64 = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, &c)| {
            let y = if c == positive { 1.0 } else { -1.0 };
            (1.0 - y * (x.dot(weights) + bias)).max(0.0)
        })
        .sum();
    reg + hinge / data.len() as f64
}
