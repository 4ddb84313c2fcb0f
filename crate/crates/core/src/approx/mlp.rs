//! One-hidden-layer perceptron with rectified-linear hidden units, trained by
//! Adam. Parameters live in a single flat buffer so optimizer state, target
//! copies and checkpoints all operate on one slice.
//!
//! Layout of `params`:
//! `w1 [input × hidden] | b1 [hidden] | w2 [output × hidden] | b2 [output]`.
//! `w1` is input-major so a sparse binary input touches contiguous rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Network input: a dense vector or the set indices of a binary vector.
#[derive(Debug, Clone, Copy)]
pub enum MlpInput<'a> {
    Dense(&'a [f64]),
    Binary(&'a [u32]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    input: usize,
    hidden: usize,
    output: usize,
    params: Vec<f64>,
}

/// Hidden activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(input, hidden, output);
        let l1 = (6.0 / (input + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + output) as f64).sqrt();
        let (w1, w2) = (net.w1_range(), net.w2_range());
        for w in &mut net.params[w1] {
            *w = rng.random_range(-l1..l1);
        }
        for w in &mut net.params[w2] {
            *w = rng.random_range(-l2..l2);
        }
        net
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        assert!(input > 0 && hidden > 0 && output > 0);
        let n = input * hidden + hidden + output * hidden + output;
        Self { input, hidden, output, params: vec![0.0; n] }
    }

    pub fn from_params(input: usize, hidden: usize, output: usize, params: Vec<f64>) -> Option<Self> {
        let net = Self::zeros(input, hidden, output);
        (params.len() == net.params.len()).then_some(Self { params, ..net })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.input, self.hidden, self.output)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w1_range(&self) -> std::ops::Range<usize> {
        0..self.input * self.hidden
    }

    fn b1_range(&self) -> std::ops::Range<usize> {
        let s = self.input * self.hidden;
        s..s + self.hidden
    }

    fn w2_range(&self) -> std::ops::Range<usize> {
        let s = self.input * self.hidden + self.hidden;
        s..s + self.output * self.hidden
    }

    fn b2_range(&self) -> std::ops::Range<usize> {
        let s = self.input * self.hidden + self.hidden + self.output * self.hidden;
        s..s + self.output
    }

    pub fn forward(&self, x: MlpInput<'_>) -> Activations {
        let h = self.hidden;
        let mut pre = self.params[self.b1_range()].to_vec();
        let w1 = &self.params[self.w1_range()];
        match x {
            MlpInput::Dense(v) => {
                debug_assert_eq!(v.len(), self.input);
                for (i, &xi) in v.iter().enumerate() {
                    if xi != 0.0 {
                        for (p, w) in pre.iter_mut().zip(&w1[i * h..(i + 1) * h]) {
                            *p += xi * w;
                        }
                    }
                }
            }
            MlpInput::Binary(active) => {
                for &i in active {
                    let i = i as usize;
                    debug_assert!(i < self.input);
                    for (p, w) in pre.iter_mut().zip(&w1[i * h..(i + 1) * h]) {
                        *p += w;
                    }
                }
            }
        }
        for p in pre.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let w2 = &self.params[self.w2_range()];
        let b2 = &self.params[self.b2_range()];
        let output = (0..self.output)
            .map(|k| b2[k] + w2[k * h..(k + 1) * h].iter().zip(&pre).map(|(w, a)| w * a).sum::<f64>())
            .collect();
        Activations { hidden: pre, output }
    }

    /// Accumulates the gradient of a scalar loss into `grad`, given the loss
    /// gradient with respect to this sample's outputs.
    pub fn backward(&self, x: MlpInput<'_>, acts: &Activations, d_out: &[f64], grad: &mut [f64]) {
        let h = self.hidden;
        let w2 = self.w2_range();
        let b2 = self.b2_range();
        let mut d_hidden = vec![0.0; h];
        for (k, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad[b2.start + k] += g;
            let row = w2.start + k * h;
            for j in 0..h {
                grad[row + j] += g * acts.hidden[j];
                d_hidden[j] += g * self.params[row + j];
            }
        }
        // ReLU gate: units clamped at zero pass no gradient.
        for (d, &a) in d_hidden.iter_mut().zip(&acts.hidden) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }
        let b1 = self.b1_range().start;
        for (j, d) in d_hidden.iter().enumerate() {
            grad[b1 + j] += d;
        }
        match x {
            MlpInput::Dense(v) => {
                for (i, &xi) in v.iter().enumerate() {
                    if xi != 0.0 {
                        for (g, d) in grad[i * h..(i + 1) * h].iter_mut().zip(&d_hidden) {
                            *g += xi * d;
                        }
                    }
                }
            }
            MlpInput::Binary(active) => {
                for &i in active {
                    let i = i as usize;
                    for (g, d) in grad[i * h..(i + 1) * h].iter_mut().zip(&d_hidden) {
                        *g += d;
                    }
                }
            }
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    for v in &mut e {
        *v /= s;
    }
    e
}

/// Mean squared error `(1/B) Σ (out[a_i] − y_i)²` and its parameter gradient.
pub fn squared_td_loss(net: &Mlp, inputs: &[MlpInput<'_>], actions: &[usize], targets: &[f64]) -> (f64, Vec<f64>) {
    let b = inputs.len() as f64;
    let mut grad = vec![0.0; net.params.len()];
    let mut loss = 0.0;
    let mut d_out = vec![0.0; net.output];
    for ((x, &a), &y) in inputs.iter().zip(actions).zip(targets) {
        let acts = net.forward(*x);
        let err = acts.output[a] - y;
        loss += err * err / b;
        d_out.iter_mut().for_each(|d| *d = 0.0);
        d_out[a] = 2.0 * err / b;
        net.backward(*x, &acts, &d_out, &mut grad);
    }
    (loss, grad)
}

/// Mean cross-entropy `−(1/B) Σ log softmax(out)[a_i]` and its gradient.
pub fn cross_entropy_loss(net: &Mlp, inputs: &[MlpInput<'_>], actions: &[usize]) -> (f64, Vec<f64>) {
    let b = inputs.len() as f64;
    let mut grad = vec![0.0; net.params.len()];
    let mut loss = 0.0;
    for (x, &a) in inputs.iter().zip(actions) {
        let acts = net.forward(*x);
        let p = softmax(&acts.output);
        loss -= p[a].max(f64::MIN_POSITIVE).ln() / b;
        let mut d_out: Vec<f64> = p.iter().map(|&pk| pk / b).collect();
        d_out[a] -= 1.0 / b;
        net.backward(*x, &acts, &d_out, &mut grad);
    }
    (loss, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n: usize, cfg: AdamConfig) -> Self {
        Self { cfg, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let AdamConfig { beta1, beta2, eps } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}
