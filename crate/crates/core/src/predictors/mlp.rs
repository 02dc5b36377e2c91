//! Multilayer perceptron with tanh hidden layers and a linear output,
//! trained by mini-batch backpropagation with delta-bar-delta step sizes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output `h`.
    fn slope(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `out × in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
}

impl MlpModel {
    /// Layer sizes `[input, hidden..., output]`, all weights and biases zero.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::precondition("an MLP needs an input and an output size"));
        }
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| Layer {
                weights: Matrix::zeros(sizes[i + 1], sizes[i]),
                bias: vec![0.0; sizes[i + 1]],
                activation: if i + 1 == n { Activation::Linear } else { Activation::Tanh },
            })
            .collect();
        Ok(Self { layers })
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn random(sizes: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let mut m = Self::zeros(sizes)?;
        for layer in &mut m.layers {
            let bound = 1.0 / (layer.weights.cols() as f64).sqrt();
            for w in layer.weights.as_mut_slice() {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(m)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].weights.cols()];
        s.extend(self.layers.iter().map(|l| l.weights.rows()));
        s
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().weights.rows()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Outputs of every layer, input first.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for layer in &self.layers {
            let z = layer.weights.mul_vec(acts.last().unwrap());
            acts.push(
                z.iter()
                    .zip(&layer.bias)
                    .map(|(z, b)| layer.activation.apply(z + b))
                    .collect(),
            );
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).pop().unwrap()
    }

    /// `E = Σ (ŷ - y)²` and its gradient with respect to every parameter, in
    /// the order of [`MlpModel::params`].
    pub fn gradient(&self, x: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
        let acts = self.trace(x);
        let out = acts.last().unwrap();
        let err: f64 = out.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum();
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let last = self.layers.len() - 1;
        let mut delta: Vec<f64> = out
            .iter()
            .zip(target)
            .map(|(o, t)| 2.0 * (o - t) * self.layers[last].activation.slope(*o))
            .collect();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &acts[li];
            let mut g = Vec::with_capacity(layer.weights.as_slice().len() + layer.bias.len());
            for d in &delta {
                g.extend(input.iter().map(|h| d * h));
            }
            g.extend_from_slice(&delta);
            grads[li] = g;
            if li > 0 {
                let below = &self.layers[li - 1];
                delta = (0..layer.weights.cols())
                    .map(|j| {
                        let back: f64 = (0..layer.weights.rows()).map(|i| layer.weights[(i, j)] * delta[i]).sum();
                        back * below.activation.slope(input[j])
                    })
                    .collect();
            }
        }
        (err, grads.concat())
    }

    /// All parameters, layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(l.weights.as_slice());
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let mut off = 0;
        for l in &mut self.layers {
            let n = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&p[off..off + n]);
            off += n;
            let b = l.bias.len();
            l.bias.copy_from_slice(&p[off..off + b]);
            off += b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    /// Mean over examples of `Σ (ŷ - y)²`.
    pub fn mean_error(&self, x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        if x.is_empty() {
            return 0.0;
        }
        x.iter()
            .zip(y)
            .map(|(xi, yi)| self.forward(xi).iter().zip(yi).map(|(o, t)| (o - t) * (o - t)).sum::<f64>())
            .sum::<f64>()
            / x.len() as f64
    }
}

/// Delta-bar-delta and early-stopping settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub eta_init: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Additive step-size increase when the gradient sign agrees.
    pub kappa: f64,
    /// Multiplicative decrease when it disagrees.
    pub phi: f64,
    /// Decay of the exponential gradient average.
    pub theta: f64,
    pub seed: u64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 500,
            patience: 20,
            eta_init: 1e-3,
            eta_min: 1e-6,
            eta_max: 0.1,
            kappa: 1e-4,
            phi: 0.5,
            theta: 0.7,
            seed: 0,
        }
    }
}

/// Per-weight step sizes and gradient averages.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub eta: Vec<f64>,
    pub grad_avg: Vec<f64>,
    pub epoch: usize,
    pub best: MlpModel,
    pub best_validation: f64,
}

impl TrainState {
    fn new(model: &MlpModel, schedule: &TrainSchedule) -> Self {
        let n = model.param_count();
        Self {
            eta: vec![schedule.eta_init; n],
            grad_avg: vec![0.0; n],
            epoch: 0,
            best: model.clone(),
            best_validation: f64::INFINITY,
        }
    }

    /// One delta-bar-delta step.
    fn step(&mut self, params: &mut [f64], grad: &[f64], s: &TrainSchedule) {
        for i in 0..params.len() {
            let agree = grad[i] * self.grad_avg[i];
            if agree > 0.0 {
                self.eta[i] += s.kappa;
            } else if agree < 0.0 {
                self.eta[i] *= s.phi;
            }
            self.eta[i] = self.eta[i].clamp(s.eta_min, s.eta_max);
            self.grad_avg[i] = (1.0 - s.theta) * grad[i] + s.theta * self.grad_avg[i];
            params[i] -= self.eta[i] * grad[i];
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: usize,
    pub train_error: Vec<f64>,
    pub validation_error: Vec<f64>,
    pub best_validation: f64,
}

/// Trains a network of layout `[in, hidden..., out]` and returns the snapshot
/// with the lowest validation error. The output biases start at the target
/// mean.
pub fn mlp_train(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    hidden: &[usize],
    schedule: &TrainSchedule,
    validation: (&[Vec<f64>], &[Vec<f64>]),
) -> Result<(MlpModel, TrainReport)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Training("MLP training needs paired, non-empty data".into()));
    }
    if schedule.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    let in_dim = x[0].len();
    let out_dim = y[0].len();
    let mut sizes = vec![in_dim];
    sizes.extend_from_slice(hidden);
    sizes.push(out_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut model = MlpModel::random(&sizes, &mut rng)?;
    let last = model.layers.len() - 1;
    for (k, b) in model.layers[last].bias.iter_mut().enumerate() {
        *b = y.iter().map(|r| r[k]).sum::<f64>() / y.len() as f64;
    }
    let (xv, yv) = if validation.0.is_empty() {
        (x, y)
    } else {
        validation
    };

    let initial = model.mean_error(x, y);
    let mut state = TrainState::new(&model, schedule);
    state.best_validation = model.mean_error(xv, yv);
    let mut report = TrainReport {
        epochs: 0,
        train_error: vec![initial],
        validation_error: vec![state.best_validation],
        best_validation: state.best_validation,
    };
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut params = model.params();
    let mut since_best = 0;
    while state.epoch < schedule.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(schedule.batch_size) {
            let mut grad = vec![0.0; params.len()];
            for &i in batch {
                let (_, g) = model.gradient(&x[i], &y[i]);
                for (a, v) in grad.iter_mut().zip(g) {
                    *a += v;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            state.step(&mut params, &grad, schedule);
            model.set_params(&params);
        }
        state.epoch += 1;
        let train_err = model.mean_error(x, y);
        let val_err = model.mean_error(xv, yv);
        report.train_error.push(train_err);
        report.validation_error.push(val_err);
        if !train_err.is_finite() || train_err > 10.0 * initial.max(1e-300) {
            return Err(Error::Training(format!(
                "MLP diverged at epoch {}: error {train_err:.4e} vs initial {initial:.4e} (max step size {:.3e})",
                state.epoch,
                state.eta.iter().cloned().fold(0.0, f64::max)
            )));
        }
        if val_err < state.best_validation {
            state.best_validation = val_err;
            state.best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= schedule.patience {
                break;
            }
        }
    }
    report.epochs = state.epoch;
    report.best_validation = state.best_validation;
    Ok((state.best, report))
}
