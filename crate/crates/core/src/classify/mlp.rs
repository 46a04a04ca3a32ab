use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::vectorize::SparseVector;

use super::lbfgs::{minimize_lbfgs, LbfgsConfig};
use super::{argmax, ClassifyError, LabeledDataset};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    // derivative expressed through the activation output h
    fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Logistic => h * (1.0 - h),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Solver {
    /// Full-batch L-BFGS.
    Lbfgs { memory: usize },
    /// Minibatch gradient descent with a constant learning rate.
    Sgd { learning_rate: f64, batch_size: usize },
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Lbfgs { memory: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub solver: Solver,
    pub seed: u64,
    /// Iterations for L-BFGS, epochs for SGD.
    pub max_iters: usize,
    pub tol: f64,
    /// L2 penalty on weights (not biases), scaled by 1 / n_samples.
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![100],
            activation: Activation::Tanh,
            solver: Solver::default(),
            seed: 0,
            max_iters: 200,
            tol: 1e-7,
            l2: 1e-4,
        }
    }
}

/// Fully connected network with softmax output. Parameters are one flat
/// vector: for each layer, an `n_in x n_out` row-major weight block followed
/// by `n_out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    pub activation: Activation,
    pub seed: u64,
}

/// Number of parameters for the given layer sizes.
pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn layer_offsets(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut offsets = Vec::with_capacity(sizes.len().saturating_sub(1));
    let mut at = 0;
    for w in sizes.windows(2) {
        let weights = at;
        let biases = at + w[0] * w[1];
        offsets.push((weights, biases));
        at = biases + w[1];
    }
    offsets
}

impl MlpModel {
    /// Weights and biases drawn from uniform(-r, r), r = sqrt(6 / (fan_in + fan_out)).
    pub fn initialize(sizes: Vec<usize>, activation: Activation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for w in sizes.windows(2) {
            let r = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.random_range(-r..r));
            }
        }
        MlpModel { sizes, params, activation, seed }
    }

    pub fn zeros(sizes: Vec<usize>, activation: Activation) -> Self {
        let params = vec![0.0; param_count(&sizes)];
        MlpModel { sizes, params, activation, seed: 0 }
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &SparseVector) -> Vec<f64> {
        let acts = forward_pass(&self.sizes, &self.params, self.activation, x);
        acts.into_iter().last().expect("output layer")
    }
}

// Activations of every non-input layer; the last entry holds softmax
// probabilities.
fn forward_pass(sizes: &[usize], params: &[f64], act: Activation, x: &SparseVector) -> Vec<Vec<f64>> {
    let offsets = layer_offsets(sizes);
    let n_layers = offsets.len();
    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    for (k, &(w_at, b_at)) in offsets.iter().enumerate() {
        let (n_in, n_out) = (sizes[k], sizes[k + 1]);
        let mut z = params[b_at..b_at + n_out].to_vec();
        if k == 0 {
            for (i, xi) in x.iter() {
                let row = &params[w_at + i * n_out..w_at + (i + 1) * n_out];
                z.iter_mut().zip(row).for_each(|(zj, w)| *zj += xi * w);
            }
        } else {
            let prev = &outputs[k - 1];
            for (i, &hi) in prev.iter().enumerate().take(n_in) {
                if hi == 0.0 {
                    continue;
                }
                let row = &params[w_at + i * n_out..w_at + (i + 1) * n_out];
                z.iter_mut().zip(row).for_each(|(zj, w)| *zj += hi * w);
            }
        }
        if k + 1 == n_layers {
            softmax_in_place(&mut z);
        } else {
            z.iter_mut().for_each(|v| *v = act.apply(*v));
        }
        outputs.push(z);
    }
    outputs
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

fn log_softmax_at(z_probs: &[f64], class: usize) -> f64 {
    z_probs[class].max(f64::MIN_POSITIVE).ln()
}

// Mean cross-entropy plus l2 / (2 n) * |W|^2 over the samples in `idx`, and
// its gradient with respect to `params`.
fn loss_grad_subset(
    sizes: &[usize],
    params: &[f64],
    act: Activation,
    data: &LabeledDataset,
    idx: &[usize],
    l2: f64,
) -> (f64, Vec<f64>) {
    let offsets = layer_offsets(sizes);
    let n_layers = offsets.len();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for &s in idx {
        let x = &data.x[s];
        let y = data.y[s];
        let outs = forward_pass(sizes, params, act, x);
        loss -= log_softmax_at(&outs[n_layers - 1], y);

        // output delta: p - onehot(y)
        let mut delta = outs[n_layers - 1].clone();
        delta[y] -= 1.0;
        for k in (0..n_layers).rev() {
            let (w_at, b_at) = offsets[k];
            let (n_in, n_out) = (sizes[k], sizes[k + 1]);
            grad[b_at..b_at + n_out].iter_mut().zip(&delta).for_each(|(g, d)| *g += d);
            if k == 0 {
                for (i, xi) in x.iter() {
                    let row = &mut grad[w_at + i * n_out..w_at + (i + 1) * n_out];
                    row.iter_mut().zip(&delta).for_each(|(g, d)| *g += xi * d);
                }
            } else {
                let prev = &outs[k - 1];
                let mut next_delta = vec![0.0; n_in];
                for i in 0..n_in {
                    let w_row = &params[w_at + i * n_out..w_at + (i + 1) * n_out];
                    let g_row = &mut grad[w_at + i * n_out..w_at + (i + 1) * n_out];
                    let hi = prev[i];
                    let mut back = 0.0;
                    for j in 0..n_out {
                        g_row[j] += hi * delta[j];
                        back += w_row[j] * delta[j];
                    }
                    next_delta[i] = back * act.derivative_from_output(hi);
                }
                delta = next_delta;
            }
        }
    }

    let n = idx.len().max(1) as f64;
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    if l2 > 0.0 {
        let mut penalty = 0.0;
        for (k, &(w_at, b_at)) in offsets.iter().enumerate() {
            debug_assert_eq!(b_at - w_at, sizes[k] * sizes[k + 1]);
            for j in w_at..b_at {
                penalty += params[j] * params[j];
                grad[j] += l2 / n * params[j];
            }
        }
        loss += 0.5 * l2 / n * penalty;
    }
    (loss, grad)
}

/// Full-data training loss and gradient at the model's current parameters.
pub fn loss_and_gradient(model: &MlpModel, data: &LabeledDataset, l2: f64) -> (f64, Vec<f64>) {
    let idx: Vec<usize> = (0..data.len()).collect();
    loss_grad_subset(&model.sizes, &model.params, model.activation, data, &idx, l2)
}

pub fn train_mlp(data: &LabeledDataset, params: &MlpParams) -> Result<MlpModel, ClassifyError> {
    if params.hidden.is_empty() || params.hidden.contains(&0) {
        return Err(ClassifyError::InvalidHyperparameter("hidden layers must be non-empty and non-zero".into()));
    }
    if params.max_iters == 0 {
        return Err(ClassifyError::InvalidHyperparameter("max_iters must be >= 1".into()));
    }
    if !(params.l2 >= 0.0 && params.tol >= 0.0) {
        return Err(ClassifyError::InvalidHyperparameter("l2 and tol must be >= 0".into()));
    }
    data.ensure_trainable()?;

    let mut sizes = vec![data.dim];
    sizes.extend(&params.hidden);
    sizes.push(data.n_classes());
    let mut model = MlpModel::initialize(sizes, params.activation, params.seed);
    let all: Vec<usize> = (0..data.len()).collect();

    match params.solver {
        Solver::Lbfgs { memory } => {
            let cfg = LbfgsConfig { memory, max_iters: params.max_iters, tol: params.tol };
            let (sizes, act) = (model.sizes.clone(), model.activation);
            let objective = |p: &[f64]| loss_grad_subset(&sizes, p, act, data, &all, params.l2);
            let out = minimize_lbfgs(std::mem::take(&mut model.params), objective, &cfg)
                .map_err(ClassifyError::NonFiniteLoss)?;
            if !out.value.is_finite() || out.x.iter().any(|p| !p.is_finite()) {
                return Err(ClassifyError::NonFiniteLoss(out.iterations));
            }
            model.params = out.x;
        }
        Solver::Sgd { learning_rate, batch_size } => {
            if !(learning_rate > 0.0) || batch_size == 0 {
                return Err(ClassifyError::InvalidHyperparameter("sgd needs learning_rate > 0 and batch_size >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_5eed);
            let mut order = all.clone();
            let mut prev = f64::INFINITY;
            for epoch in 1..=params.max_iters {
                order.shuffle(&mut rng);
                for batch in order.chunks(batch_size) {
                    let (_, grad) = loss_grad_subset(&model.sizes, &model.params, model.activation, data, batch, params.l2);
                    model.params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= learning_rate * g);
                }
                let (loss, _) = loss_grad_subset(&model.sizes, &model.params, model.activation, data, &all, params.l2);
                if !loss.is_finite() {
                    return Err(ClassifyError::NonFiniteLoss(epoch));
                }
                if prev - loss < params.tol {
                    break;
                }
                prev = loss;
            }
        }
    }
    Ok(model)
}

/// Softmax probabilities and their argmax.
pub fn predict_mlp(model: &MlpModel, x: &SparseVector) -> (usize, Vec<f64>) {
    let probs = model.forward(x);
    (argmax(&probs), probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> LabeledDataset {
        let pts = [((0.0, 0.0), 0), ((1.0, 1.0), 0), ((1.0, 0.0), 1), ((0.0, 1.0), 1)];
        // shift inputs off zero so the sparse representation keeps both coordinates meaningful
        let x = pts
            .iter()
            .map(|&((a, b), _)| SparseVector::from_dense(&[a * 2.0 - 1.0, b * 2.0 - 1.0]))
            .collect();
        let y = pts.iter().map(|&(_, c)| c).collect();
        LabeledDataset::new(x, y, vec!["same".into(), "diff".into()], 2).unwrap()
    }

    #[test]
    fn xor_is_learned() {
        let data = xor();
        let params = MlpParams { hidden: vec![4], seed: 1, l2: 0.0, tol: 1e-12, max_iters: 500, ..Default::default() };
        let model = train_mlp(&data, &params).unwrap();
        for (x, &c) in data.x.iter().zip(&data.y) {
            assert_eq!(predict_mlp(&model, x).0, c);
        }
    }

    #[test]
    fn xor_with_sgd() {
        let data = xor();
        let params = MlpParams {
            hidden: vec![8],
            seed: 2,
            l2: 0.0,
            tol: 0.0,
            max_iters: 3000,
            solver: Solver::Sgd { learning_rate: 0.5, batch_size: 4 },
            ..Default::default()
        };
        let model = train_mlp(&data, &params).unwrap();
        for (x, &c) in data.x.iter().zip(&data.y) {
            assert_eq!(predict_mlp(&model, x).0, c);
        }
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = MlpModel::initialize(vec![5, 3, 2], Activation::Tanh, 9);
        let b = MlpModel::initialize(vec![5, 3, 2], Activation::Tanh, 9);
        let c = MlpModel::initialize(vec![5, 3, 2], Activation::Tanh, 10);
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
        assert_eq!(a.params.len(), 5 * 3 + 3 + 3 * 2 + 2);
        let r1 = (6.0f64 / 8.0).sqrt();
        assert!(a.params[..18].iter().all(|p| p.abs() < r1));
    }

    #[test]
    fn zero_network_is_uniform() {
        let m = MlpModel::zeros(vec![4, 3, 5], Activation::Tanh);
        let (pred, probs) = predict_mlp(&m, &SparseVector::from_dense(&[1.0, -2.0, 0.5, 3.0]));
        assert_eq!(pred, 0);
        assert!(probs.iter().all(|p| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = MlpModel::initialize(vec![6, 4, 3, 3], Activation::Logistic, 4);
        for k in 0..20 {
            let x = SparseVector::from_dense(&[k as f64, -1.0, 0.0, 3.5, 0.2 * k as f64, 100.0]);
            let s: f64 = m.forward(&x).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn guards() {
        let data = xor();
        let bad = MlpParams { hidden: vec![], ..Default::default() };
        assert!(matches!(train_mlp(&data, &bad), Err(ClassifyError::InvalidHyperparameter(_))));
        let bad = MlpParams { max_iters: 0, ..Default::default() };
        assert!(matches!(train_mlp(&data, &bad), Err(ClassifyError::InvalidHyperparameter(_))));
    }
}
