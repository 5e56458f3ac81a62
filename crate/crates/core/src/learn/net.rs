//! Actor-critic over the five operator kinds.
//!
//! Each node row passes through two affine-ReLU layers with shared weights;
//! the results are mean-pooled, concatenated with the operator vector and fed
//! through two more affine-ReLU layers. A linear policy head gives five logits
//! and a linear value head a scalar. All parameters live in one flat vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{op_dim, StateFeatures, NODE_FEATURES};
use super::LearnError;

pub const ACTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    offset: usize,
}

impl Layer {
    fn weights(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.inputs * self.outputs
    }

    fn bias(&self) -> std::ops::Range<usize> {
        let w = self.offset + self.inputs * self.outputs;
        w..w + self.outputs
    }

    fn size(&self) -> usize {
        (self.inputs + 1) * self.outputs
    }

    /// `out = W x + b`.
    fn forward(&self, params: &[f64], x: &[f64], out: &mut [f64]) {
        let w = &params[self.weights()];
        let b = &params[self.bias()];
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &w[o * self.inputs..(o + 1) * self.inputs];
            *slot = b[o] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        }
    }

    /// Accumulates parameter gradients for upstream `dout` at input `x` and,
    /// when `dx` is given, adds `W^T dout` into it.
    fn backward(&self, params: &[f64], x: &[f64], dout: &[f64], grad: &mut [f64], dx: Option<&mut [f64]>) {
        let gw = self.weights();
        let gb = self.bias();
        for (o, &d) in dout.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad[gb.start + o] += d;
            let g = &mut grad[gw.start + o * self.inputs..gw.start + (o + 1) * self.inputs];
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi += d * xi;
            }
        }
        if let Some(dx) = dx {
            let w = &params[gw];
            for (o, &d) in dout.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (dxi, wi) in dx.iter_mut().zip(&w[o * self.inputs..(o + 1) * self.inputs]) {
                    *dxi += d * wi;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    enc1: Layer,
    enc2: Layer,
    trunk1: Layer,
    trunk2: Layer,
    policy: Layer,
    value: Layer,
}

impl Layout {
    fn new(width: usize, history: usize) -> Self {
        let mut offset = 0;
        let mut layer = |inputs, outputs| {
            let l = Layer { inputs, outputs, offset };
            offset += l.size();
            l
        };
        Layout {
            enc1: layer(NODE_FEATURES, width),
            enc2: layer(width, width),
            trunk1: layer(width + op_dim(history), width),
            trunk2: layer(width, width),
            policy: layer(width, ACTIONS),
            value: layer(width, 1),
        }
    }

    fn total(&self) -> usize {
        self.value.offset + self.value.size()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    width: usize,
    history: usize,
    layout: Layout,
    params: Vec<f64>,
}

/// Network output for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub probs: [f64; ACTIONS],
    pub value: f64,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    rows: usize,
    h1: Vec<f64>,
    h2: Vec<f64>,
    z: Vec<f64>,
    t1: Vec<f64>,
    t2: Vec<f64>,
    pub logits: [f64; ACTIONS],
    pub output: Output,
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn mask(d: &mut [f64], act: &[f64]) {
    for (di, &a) in d.iter_mut().zip(act) {
        if a <= 0.0 {
            *di = 0.0;
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; ACTIONS]) -> [f64; ACTIONS] {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = logits.map(|l| (l - m).exp());
    let s: f64 = out.iter().sum();
    for p in &mut out {
        *p /= s;
    }
    out
}

impl ActorCritic {
    /// Hidden layers uniform in `±1/sqrt(fan_in)`, heads zero.
    pub fn new(width: usize, history: usize, seed: u64) -> Self {
        let layout = Layout::new(width, history);
        let mut params = vec![0.0; layout.total()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in [layout.enc1, layout.enc2, layout.trunk1, layout.trunk2] {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            for p in &mut params[l.offset..l.offset + l.size()] {
                *p = rng.gen_range(-bound..bound);
            }
        }
        Self { width, history, layout, params }
    }

    pub fn from_params(width: usize, history: usize, params: Vec<f64>) -> Result<Self, LearnError> {
        let layout = Layout::new(width, history);
        if params.len() != layout.total() {
            return Err(LearnError::DimensionMismatch { expected: layout.total(), got: params.len() });
        }
        Ok(Self { width, history, layout, params })
    }

    pub fn param_count(width: usize, history: usize) -> usize {
        Layout::new(width, history).total()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check(&self, s: &StateFeatures) -> Result<(), LearnError> {
        let expected = op_dim(self.history);
        if s.op_vector.len() != expected {
            return Err(LearnError::DimensionMismatch { expected, got: s.op_vector.len() });
        }
        if s.rows == 0 || s.node_matrix.len() != s.rows * NODE_FEATURES {
            return Err(LearnError::DimensionMismatch { expected: s.rows * NODE_FEATURES, got: s.node_matrix.len() });
        }
        Ok(())
    }

    pub fn forward(&self, s: &StateFeatures) -> Result<Output, LearnError> {
        Ok(self.trace(s)?.output)
    }

    pub fn trace(&self, s: &StateFeatures) -> Result<Trace, LearnError> {
        self.check(s)?;
        let w = self.width;
        let p = &self.params;
        let l = &self.layout;
        let rows = s.rows;
        let mut h1 = vec![0.0; rows * w];
        let mut h2 = vec![0.0; rows * w];
        let mut pooled = vec![0.0; w];
        for r in 0..rows {
            let a = &mut h1[r * w..(r + 1) * w];
            l.enc1.forward(p, s.row(r), a);
            relu(a);
            let b = &mut h2[r * w..(r + 1) * w];
            l.enc2.forward(p, &h1[r * w..(r + 1) * w], b);
            relu(b);
            for (acc, v) in pooled.iter_mut().zip(b.iter()) {
                *acc += v;
            }
        }
        let mut z = pooled;
        for v in &mut z {
            *v /= rows as f64;
        }
        z.extend_from_slice(&s.op_vector);
        let mut t1 = vec![0.0; w];
        l.trunk1.forward(p, &z, &mut t1);
        relu(&mut t1);
        let mut t2 = vec![0.0; w];
        l.trunk2.forward(p, &t1, &mut t2);
        relu(&mut t2);
        let mut logits = [0.0; ACTIONS];
        l.policy.forward(p, &t2, &mut logits);
        let mut value = [0.0];
        l.value.forward(p, &t2, &mut value);
        let output = Output { probs: softmax(&logits), value: value[0] };
        Ok(Trace { rows, h1, h2, z, t1, t2, logits, output })
    }

    /// Adds into `grad` the parameter gradient of
    /// `dlogits . logits + dvalue * value` at the traced state.
    pub fn backward(&self, s: &StateFeatures, tr: &Trace, dlogits: &[f64; ACTIONS], dvalue: f64, grad: &mut [f64]) {
        let w = self.width;
        let p = &self.params;
        let l = &self.layout;
        let mut dt2 = vec![0.0; w];
        l.policy.backward(p, &tr.t2, dlogits, grad, Some(&mut dt2));
        l.value.backward(p, &tr.t2, &[dvalue], grad, Some(&mut dt2));
        mask(&mut dt2, &tr.t2);
        let mut dt1 = vec![0.0; w];
        l.trunk2.backward(p, &tr.t1, &dt2, grad, Some(&mut dt1));
        mask(&mut dt1, &tr.t1);
        let mut dz = vec![0.0; tr.z.len()];
        l.trunk1.backward(p, &tr.z, &dt1, grad, Some(&mut dz));
        let scale = 1.0 / tr.rows as f64;
        let mut dh2 = vec![0.0; w];
        let mut dh1 = vec![0.0; w];
        for r in 0..tr.rows {
            let h1 = &tr.h1[r * w..(r + 1) * w];
            let h2 = &tr.h2[r * w..(r + 1) * w];
            for k in 0..w {
                dh2[k] = if h2[k] > 0.0 { dz[k] * scale } else { 0.0 };
            }
            dh1.iter_mut().for_each(|v| *v = 0.0);
            l.enc2.backward(p, h1, &dh2, grad, Some(&mut dh1));
            mask(&mut dh1, h1);
            l.enc1.backward(p, s.row(r), &dh1, grad, None);
        }
    }

    /// Gradient of `log pi(action | s)`.
    pub fn grad_log_prob(&self, s: &StateFeatures, action: usize) -> Result<Vec<f64>, LearnError> {
        let tr = self.trace(s)?;
        let mut d = [0.0; ACTIONS];
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = f64::from(u8::from(k == action)) - tr.output.probs[k];
        }
        let mut g = vec![0.0; self.params.len()];
        self.backward(s, &tr, &d, 0.0, &mut g);
        Ok(g)
    }

    /// Gradient of the value estimate.
    pub fn grad_value(&self, s: &StateFeatures) -> Result<Vec<f64>, LearnError> {
        let tr = self.trace(s)?;
        let mut g = vec![0.0; self.params.len()];
        self.backward(s, &tr, &[0.0; ACTIONS], 1.0, &mut g);
        Ok(g)
    }
}
