//! Single-hidden-layer ReLU perceptron trained full-batch with Adam.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Task};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty on the weight matrices (not the biases).
    pub alpha: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 100,
            epochs: 200,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            alpha: 1e-4,
        }
    }
}

/// Network weights. `w1` is `hidden x inputs` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    pub inputs: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpNet {
    /// Glorot-uniform initialization.
    pub fn random(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let bound2 = (6.0 / (hidden + 1) as f64).sqrt();
        let mut draw = |b: f64, n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-b..b)).collect() };
        let w1 = draw(bound1, hidden * inputs);
        let b1 = draw(bound1, hidden);
        let w2 = draw(bound2, hidden);
        let b2 = draw(bound2, 1)[0];
        Self {
            inputs,
            hidden,
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Flattened `[w1, b1, w2, b2]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = rest[0];
    }

    fn hidden_activations(&self, row: &[f64], pre: &mut [f64]) {
        for (k, z) in pre.iter_mut().enumerate() {
            let w = &self.w1[k * self.inputs..(k + 1) * self.inputs];
            *z = self.b1[k] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Output before the link function.
    pub fn raw_output(&self, row: &[f64]) -> f64 {
        let mut pre = vec![0.0; self.hidden];
        self.hidden_activations(row, &mut pre);
        self.b2 + pre.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64], task: Task) -> f64 {
        let out = self.raw_output(row);
        match task {
            Task::Regression => out,
            Task::BinaryClassification => sigmoid(out),
        }
    }
}

/// Weighted-mean loss (half squared error or log loss) plus
/// `alpha / 2 * |W|^2`, and its gradient in [`MlpNet::params`] layout.
pub fn loss_and_gradient(net: &MlpNet, x: &Matrix, y: &[f64], w: &[f64], task: Task, alpha: f64) -> (f64, Vec<f64>) {
    let total: f64 = w.iter().sum();
    let (n_w1, n_b1) = (net.w1.len(), net.b1.len());
    let mut grad = vec![0.0; net.n_params()];
    let mut loss = 0.0;
    let mut pre = vec![0.0; net.hidden];
    for (i, row) in x.rows_iter().enumerate() {
        net.hidden_activations(row, &mut pre);
        let out = net.b2 + pre.iter().zip(&net.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>();
        let weight = w[i] / total;
        let delta = match task {
            Task::Regression => {
                let r = out - y[i];
                loss += weight * 0.5 * r * r;
                weight * r
            }
            Task::BinaryClassification => {
                let softplus = if out > 0.0 { out + (-out).exp().ln_1p() } else { out.exp().ln_1p() };
                loss += weight * (softplus - y[i] * out);
                weight * (sigmoid(out) - y[i])
            }
        };
        for k in 0..net.hidden {
            if pre[k] > 0.0 {
                grad[n_w1 + n_b1 + k] += delta * pre[k];
                let dh = delta * net.w2[k];
                grad[n_w1 + k] += dh;
                let g = &mut grad[k * net.inputs..(k + 1) * net.inputs];
                for (gj, xj) in g.iter_mut().zip(row) {
                    *gj += dh * xj;
                }
            }
        }
        *grad.last_mut().expect("b2") += delta;
    }
    let sq: f64 = net.w1.iter().chain(&net.w2).map(|v| v * v).sum();
    loss += 0.5 * alpha * sq;
    for (g, v) in grad[..n_w1].iter_mut().zip(&net.w1) {
        *g += alpha * v;
    }
    for (g, v) in grad[n_w1 + n_b1..n_w1 + n_b1 + net.hidden].iter_mut().zip(&net.w2) {
        *g += alpha * v;
    }
    (loss, grad)
}

/// Adam state for a flat parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &MlpParams) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        }
    }
}

/// Trains from a Glorot initialization whose output bias starts at the
/// constant-predictor optimum (weighted mean, or prior log-odds).
pub(crate) fn fit_mlp(x: &Matrix, y: &[f64], w: &[f64], task: Task, cfg: &MlpParams, seed: u64) -> (MlpNet, Vec<f64>) {
    let mut net = MlpNet::random(x.ncols(), cfg.hidden, seed);
    let total: f64 = w.iter().sum();
    let mean = y.iter().zip(w).map(|(t, wi)| t * wi).sum::<f64>() / total;
    net.b2 = match task {
        Task::Regression => mean,
        Task::BinaryClassification => {
            let p = mean.clamp(1e-12, 1.0 - 1e-12);
            (p / (1.0 - p)).ln()
        }
    };
    let mut params = net.params();
    let mut adam = Adam::new(params.len());
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        let (loss, grad) = loss_and_gradient(&net, x, y, w, task, cfg.alpha);
        trace.push(loss);
        adam.step(&mut params, &grad, cfg);
        net.set_params(&params);
    }
    trace.push(loss_and_gradient(&net, x, y, w, task, cfg.alpha).0);
    (net, trace)
}
