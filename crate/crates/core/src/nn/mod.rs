//! Stacked-LSTM actor and critic with hand-written backpropagation through
//! time.
//!
//! Everything is `f64` and row-major. The same dot-product kernel is used by
//! the single-step path (rollouts) and the sequence path (training), so both
//! produce bitwise-identical outputs.
//!
//! Gate order inside every LSTM weight matrix is input, forget, cell, output:
//! rows `[0, H)` are the input gate, `[H, 2H)` forget, `[2H, 3H)` cell
//! candidate, `[3H, 4H)` output.

mod checkpoint;
mod matrix;

pub use checkpoint::{
    load_checkpoint, load_weights, save_checkpoint, save_weights, Checkpoint, Tensor,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use matrix::Matrix;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Architecture of one actor-critic pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub action_dim: usize,
}

impl NetConfig {
    /// 3 stacked LSTM layers of 64 units on the 8-value observation.
    pub fn standard(action_dim: usize) -> Self {
        Self {
            input_dim: crate::observation::OBS_DIM,
            hidden: 64,
            layers: 3,
            action_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.layers == 0 || self.action_dim == 0 {
            return Err(Error::InvalidParams("network dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Orthogonal `rows x cols` matrix scaled by `gain`.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Matrix {
    let tall = rows >= cols;
    let (r, c) = if tall { (rows, cols) } else { (cols, rows) };
    let a = DMatrix::<f64>::from_fn(r, c, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let (mut q, rm) = (qr.q(), qr.r());
    for j in 0..c {
        if rm[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Matrix::from_fn(rows, cols, |i, j| gain * if tall { q[(i, j)] } else { q[(j, i)] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    /// `[4H x I]`
    pub w_ih: Matrix,
    /// `[4H x H]`
    pub w_hh: Matrix,
    /// `[4H]`
    pub bias: Vec<f64>,
}

impl LstmLayer {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_ih: Matrix::zeros(4 * hidden, input),
            w_hh: Matrix::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    /// Per-gate orthogonal blocks, zero bias, forget-gate bias 1.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(input, hidden);
        for gate in 0..4 {
            let bi = orthogonal(hidden, input, 1.0, rng);
            let bh = orthogonal(hidden, hidden, 1.0, rng);
            for r in 0..hidden {
                layer.w_ih.row_mut(gate * hidden + r).copy_from_slice(bi.row(r));
                layer.w_hh.row_mut(gate * hidden + r).copy_from_slice(bh.row(r));
            }
        }
        layer.bias[hidden..2 * hidden].fill(1.0);
        layer
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols()
    }

    fn params(&self) -> [&[f64]; 3] {
        [self.w_ih.as_slice(), self.w_hh.as_slice(), &self.bias]
    }

    fn params_mut(&mut self) -> [&mut [f64]; 3] {
        [self.w_ih.as_mut_slice(), self.w_hh.as_mut_slice(), &mut self.bias]
    }

    /// Gate activations for input `x` and previous hidden `h`, written into
    /// `gates` (length 4H).
    fn gates(&self, x: &[f64], h: &[f64], gates: &mut [f64]) {
        let n = self.hidden();
        gates.copy_from_slice(&self.bias);
        self.w_ih.matvec_add(x, gates);
        self.w_hh.matvec_add(h, gates);
        for (k, g) in gates.iter_mut().enumerate() {
            *g = if k / n == 2 { g.tanh() } else { sigmoid(*g) };
        }
    }

    /// One recurrence step in place.
    pub fn step(&self, x: &[f64], state: &mut LayerState, gates: &mut [f64]) {
        let n = self.hidden();
        self.gates(x, &state.h, gates);
        for j in 0..n {
            let (i, f, g, o) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
            let c = f * state.c[j] + i * g;
            state.c[j] = c;
            state.h[j] = o * c.tanh();
        }
    }
}

/// Affine output head.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// `[O x I]`
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Matrix::zeros(output, input),
            bias: vec![0.0; output],
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, gain: f64, rng: &mut R) -> Self {
        Self {
            weight: orthogonal(output, input, gain, rng),
            bias: vec![0.0; output],
        }
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        self.weight.matvec_add(x, out);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

/// Hidden and cell vectors of every layer of one network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetState {
    pub layers: Vec<LayerState>,
}

impl NetState {
    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.h.iter().chain(&l.c).all(|v| v.is_finite()))
    }
}

/// Everything a sequence forward pass keeps for the backward pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    input_dim: usize,
    /// `[T x I]`
    x: Vec<f64>,
    /// `[T x 4H]` post-activation
    gates: Vec<f64>,
    /// `[T x H]`
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NetTrace {
    pub steps: usize,
    layers: Vec<LayerTrace>,
    /// `[T x O]`
    pub outputs: Vec<f64>,
}

impl NetTrace {
    /// Top-layer features at every step, `[T x H]`.
    pub fn features(&self) -> &[f64] {
        &self.layers.last().expect("at least one layer").h
    }
}

/// Stacked LSTM followed by an affine head.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentNet {
    pub layers: Vec<LstmLayer>,
    pub head: Linear,
}

impl RecurrentNet {
    pub fn zeros(input: usize, hidden: usize, layers: usize, output: usize) -> Self {
        let layers = (0..layers)
            .map(|k| LstmLayer::zeros(if k == 0 { input } else { hidden }, hidden))
            .collect();
        Self {
            layers,
            head: Linear::zeros(hidden, output),
        }
    }

    pub fn init<R: Rng + ?Sized>(
        input: usize,
        hidden: usize,
        layers: usize,
        output: usize,
        head_gain: f64,
        rng: &mut R,
    ) -> Self {
        let layers = (0..layers)
            .map(|k| LstmLayer::init(if k == 0 { input } else { hidden }, hidden, rng))
            .collect();
        Self {
            layers,
            head: Linear::init(hidden, output, head_gain, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.head.bias.len()
    }

    pub fn zero_state(&self) -> NetState {
        NetState {
            layers: self
                .layers
                .iter()
                .map(|l| LayerState {
                    h: vec![0.0; l.hidden()],
                    c: vec![0.0; l.hidden()],
                })
                .collect(),
        }
    }

    fn check_state(&self, state: &NetState) -> Result<()> {
        let ok = state.layers.len() == self.layers.len()
            && self
                .layers
                .iter()
                .zip(&state.layers)
                .all(|(l, s)| s.h.len() == l.hidden() && s.c.len() == l.hidden());
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("recurrent state does not match the network".into()))
        }
    }

    /// Run the LSTM stack for one step and return the top-layer features.
    pub fn features_step(&self, x: &[f64], state: &mut NetState) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                what: "network input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        self.check_state(state)?;
        let mut input = x.to_vec();
        for (layer, s) in self.layers.iter().zip(&mut state.layers) {
            let mut gates = vec![0.0; 4 * layer.hidden()];
            layer.step(&input, s, &mut gates);
            input.clone_from(&s.h);
        }
        Ok(input)
    }

    /// One step through the stack and the head.
    pub fn step(&self, x: &[f64], state: &mut NetState) -> Result<Vec<f64>> {
        let features = self.features_step(x, state)?;
        let mut out = vec![0.0; self.output_dim()];
        self.head.forward(&features, &mut out);
        Ok(out)
    }

    /// Forward over a whole sequence `xs` (`[T x I]`) from the zero state.
    pub fn forward_seq(&self, xs: &[f64]) -> Result<NetTrace> {
        let i0 = self.input_dim();
        if xs.len() % i0 != 0 {
            return Err(Error::Dimension {
                what: "input sequence",
                expected: i0,
                got: xs.len() % i0,
            });
        }
        let steps = xs.len() / i0;
        let mut traces = Vec::with_capacity(self.layers.len());
        let mut input = xs.to_vec();
        for layer in &self.layers {
            let (ni, n) = (layer.input_dim(), layer.hidden());
            let mut tr = LayerTrace {
                input_dim: ni,
                x: input,
                gates: vec![0.0; steps * 4 * n],
                c: vec![0.0; steps * n],
                tanh_c: vec![0.0; steps * n],
                h: vec![0.0; steps * n],
            };
            let mut state = LayerState {
                h: vec![0.0; n],
                c: vec![0.0; n],
            };
            for t in 0..steps {
                let gates = &mut tr.gates[t * 4 * n..(t + 1) * 4 * n];
                layer.step(&tr.x[t * ni..(t + 1) * ni], &mut state, gates);
                tr.c[t * n..(t + 1) * n].copy_from_slice(&state.c);
                tr.h[t * n..(t + 1) * n].copy_from_slice(&state.h);
                for (tc, c) in tr.tanh_c[t * n..(t + 1) * n].iter_mut().zip(&state.c) {
                    *tc = c.tanh();
                }
            }
            input = tr.h.clone();
            traces.push(tr);
        }
        let o = self.output_dim();
        let n = self.layers.last().map(|l| l.hidden()).unwrap_or(0);
        let mut outputs = vec![0.0; steps * o];
        for t in 0..steps {
            self.head
                .forward(&input[t * n..(t + 1) * n], &mut outputs[t * o..(t + 1) * o]);
        }
        Ok(NetTrace {
            steps,
            layers: traces,
            outputs,
        })
    }

    /// Gradients of a loss with respect to every parameter, given the loss
    /// gradient `d_out` (`[T x O]`) for the recorded outputs.
    ///
    /// `window` truncates the recurrent gradient into chunks of that many
    /// steps counted from the sequence start; `None` backpropagates through
    /// the whole sequence.
    pub fn backward_seq(
        &self,
        trace: &NetTrace,
        d_out: &[f64],
        window: Option<usize>,
    ) -> Result<RecurrentNet> {
        let steps = trace.steps;
        let o = self.output_dim();
        if d_out.len() != steps * o || trace.layers.len() != self.layers.len() {
            return Err(Error::Shape("backward called with a trace from another graph".into()));
        }
        let mut grad = self.zeros_like();

        // head
        let n_top = self.layers.last().map(|l| l.hidden()).unwrap_or(0);
        let top = trace.features();
        let mut dh = vec![0.0; steps * n_top];
        for t in 0..steps {
            let g = &d_out[t * o..(t + 1) * o];
            let x = &top[t * n_top..(t + 1) * n_top];
            grad.head.weight.rank1_add(g, x);
            for (b, v) in grad.head.bias.iter_mut().zip(g) {
                *b += v;
            }
            self.head.weight.matvec_t_add(g, &mut dh[t * n_top..(t + 1) * n_top]);
        }

        for (k, (layer, tr)) in self.layers.iter().zip(&trace.layers).enumerate().rev() {
            let lg = &mut grad.layers[k];
            let (ni, n) = (tr.input_dim, layer.hidden());
            let mut dx = vec![0.0; steps * ni];
            let mut dh_next = vec![0.0; n];
            let mut dc_next = vec![0.0; n];
            let mut dpre = vec![0.0; 4 * n];
            let zeros = vec![0.0; n];
            for t in (0..steps).rev() {
                if let Some(w) = window {
                    if w > 0 && (t + 1) % w == 0 && t + 1 < steps {
                        dh_next.fill(0.0);
                        dc_next.fill(0.0);
                    }
                }
                let gates = &tr.gates[t * 4 * n..(t + 1) * 4 * n];
                let tanh_c = &tr.tanh_c[t * n..(t + 1) * n];
                let (c_prev, h_prev) = if t == 0 {
                    (&zeros[..], &zeros[..])
                } else {
                    (&tr.c[(t - 1) * n..t * n], &tr.h[(t - 1) * n..t * n])
                };
                for j in 0..n {
                    let (i, f, g, og) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
                    let dhj = dh[t * n + j] + dh_next[j];
                    let tc = tanh_c[j];
                    let dc = dhj * og * (1.0 - tc * tc) + dc_next[j];
                    dpre[j] = dc * g * i * (1.0 - i);
                    dpre[n + j] = dc * c_prev[j] * f * (1.0 - f);
                    dpre[2 * n + j] = dc * i * (1.0 - g * g);
                    dpre[3 * n + j] = dhj * tc * og * (1.0 - og);
                    dc_next[j] = dc * f;
                }
                let x = &tr.x[t * ni..(t + 1) * ni];
                lg.w_ih.rank1_add(&dpre, x);
                lg.w_hh.rank1_add(&dpre, h_prev);
                for (b, v) in lg.bias.iter_mut().zip(&dpre) {
                    *b += v;
                }
                layer.w_ih.matvec_t_add(&dpre, &mut dx[t * ni..(t + 1) * ni]);
                dh_next.fill(0.0);
                layer.w_hh.matvec_t_add(&dpre, &mut dh_next);
            }
            dh = dx;
        }
        Ok(grad)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayer::zeros(l.input_dim(), l.hidden()))
                .collect(),
            head: Linear::zeros(self.head.weight.cols(), self.output_dim()),
        }
    }

    fn params(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = self.layers.iter().flat_map(|l| l.params()).collect();
        v.push(self.head.weight.as_slice());
        v.push(&self.head.bias);
        v
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = self.layers.iter_mut().flat_map(|l| l.params_mut()).collect();
        v.push(self.head.weight.as_mut_slice());
        v.push(&mut self.head.bias);
        v
    }

    fn named(&self, prefix: &str, head: &str) -> Vec<(String, Vec<usize>)> {
        let mut v = Vec::new();
        for (k, l) in self.layers.iter().enumerate() {
            let p = format!("{prefix}.lstm_{}", k + 1);
            v.push((format!("{p}.w_ih"), vec![l.w_ih.rows(), l.w_ih.cols()]));
            v.push((format!("{p}.w_hh"), vec![l.w_hh.rows(), l.w_hh.cols()]));
            v.push((format!("{p}.bias"), vec![l.bias.len()]));
        }
        v.push((format!("{prefix}.{head}.weight"), vec![self.head.weight.rows(), self.head.weight.cols()]));
        v.push((format!("{prefix}.{head}.bias"), vec![self.head.bias.len()]));
        v
    }

    fn from_tensors(map: &BTreeMap<String, Tensor>, prefix: &str, head: &str) -> Result<Self> {
        let get = |name: &str, dims: usize| -> Result<&Tensor> {
            let t = map
                .get(name)
                .ok_or_else(|| Error::Shape(format!("missing tensor `{name}`")))?;
            if t.shape.len() != dims {
                return Err(Error::Shape(format!("tensor `{name}` has rank {}", t.shape.len())));
            }
            Ok(t)
        };
        let matrix = |t: &Tensor| Matrix::from_vec(t.shape[0], t.shape[1], t.data.clone());
        let mut layers = Vec::new();
        let mut k = 1;
        while map.contains_key(&format!("{prefix}.lstm_{k}.w_ih")) {
            let p = format!("{prefix}.lstm_{k}");
            let w_ih = matrix(get(&format!("{p}.w_ih"), 2)?)?;
            let w_hh = matrix(get(&format!("{p}.w_hh"), 2)?)?;
            let bias = get(&format!("{p}.bias"), 1)?.data.clone();
            let n = w_hh.cols();
            if w_hh.rows() != 4 * n || w_ih.rows() != 4 * n || bias.len() != 4 * n {
                return Err(Error::Shape(format!("inconsistent LSTM shapes in `{p}`")));
            }
            if let Some(prev) = layers.last() {
                let prev: &LstmLayer = prev;
                if prev.hidden() != w_ih.cols() {
                    return Err(Error::Shape(format!("`{p}` input does not match the layer below")));
                }
            }
            layers.push(LstmLayer { w_ih, w_hh, bias });
            k += 1;
        }
        if layers.is_empty() {
            return Err(Error::Shape(format!("no LSTM layers for `{prefix}`")));
        }
        let weight = matrix(get(&format!("{prefix}.{head}.weight"), 2)?)?;
        let bias = get(&format!("{prefix}.{head}.bias"), 1)?.data.clone();
        if weight.rows() != bias.len() || weight.cols() != layers.last().unwrap().hidden() {
            return Err(Error::Shape(format!("head `{prefix}.{head}` does not fit")));
        }
        Ok(Self {
            layers,
            head: Linear { weight, bias },
        })
    }
}

/// Actor network, state-independent log standard deviation, critic network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    pub actor: RecurrentNet,
    pub log_std: Vec<f64>,
    pub critic: RecurrentNet,
}

/// Recurrent state of both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub actor: NetState,
    pub critic: NetState,
}

/// One-step output of the actor-critic.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value: f64,
}

pub const INITIAL_LOG_STD: f64 = -std::f64::consts::LN_2;

impl NetworkWeights {
    pub fn zeros(cfg: &NetConfig) -> Self {
        Self {
            actor: RecurrentNet::zeros(cfg.input_dim, cfg.hidden, cfg.layers, cfg.action_dim),
            log_std: vec![INITIAL_LOG_STD; cfg.action_dim],
            critic: RecurrentNet::zeros(cfg.input_dim, cfg.hidden, cfg.layers, 1),
        }
    }

    /// Orthogonal initialization; the actor head is scaled down so initial
    /// actions stay near the middle of their range.
    pub fn init<R: Rng + ?Sized>(cfg: &NetConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let actor = RecurrentNet::init(cfg.input_dim, cfg.hidden, cfg.layers, cfg.action_dim, 0.01, rng);
        let critic = RecurrentNet::init(cfg.input_dim, cfg.hidden, cfg.layers, 1, 1.0, rng);
        Ok(Self {
            actor,
            log_std: vec![INITIAL_LOG_STD; cfg.action_dim],
            critic,
        })
    }

    pub fn config(&self) -> NetConfig {
        NetConfig {
            input_dim: self.actor.input_dim(),
            hidden: self.actor.layers[0].hidden(),
            layers: self.actor.layers.len(),
            action_dim: self.actor.output_dim(),
        }
    }

    pub fn zero_state(&self) -> RecurrentState {
        RecurrentState {
            actor: self.actor.zero_state(),
            critic: self.critic.zero_state(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            actor: self.actor.zeros_like(),
            log_std: vec![0.0; self.log_std.len()],
            critic: self.critic.zeros_like(),
        }
    }

    /// One step of both networks.
    pub fn policy_step(&self, obs: &[f64], state: &mut RecurrentState) -> Result<PolicyOutput> {
        let mean = self.actor.step(obs, &mut state.actor)?;
        let value = self.critic.step(obs, &mut state.critic)?[0];
        Ok(PolicyOutput {
            mean,
            log_std: self.log_std.clone(),
            value,
        })
    }

    /// Every parameter slice, in a fixed order shared with [`Self::params_mut`]
    /// and [`Self::tensor_shapes`].
    pub fn params(&self) -> Vec<&[f64]> {
        let mut v = self.actor.params();
        v.push(&self.log_std);
        v.extend(self.critic.params());
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.actor.params_mut();
        v.push(&mut self.log_std);
        v.extend(self.critic.params_mut());
        v
    }

    /// Number of actor slices (including `log_std`) at the front of
    /// [`Self::params`]; the rest belong to the critic.
    pub fn actor_param_count(&self) -> usize {
        self.actor.params().len() + 1
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Tensor names and shapes, in parameter order.
    pub fn tensor_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut v = self.actor.named("actor", "actor_mean");
        v.push(("actor_logstd".to_string(), vec![self.log_std.len()]));
        v.extend(self.critic.named("critic", "critic_value"));
        v
    }

    pub fn to_tensors(&self) -> Vec<Tensor> {
        self.tensor_shapes()
            .into_iter()
            .zip(self.params())
            .map(|((name, shape), data)| Tensor {
                name,
                shape,
                data: data.to_vec(),
            })
            .collect()
    }

    pub fn from_tensors(tensors: &[Tensor]) -> Result<Self> {
        let map: BTreeMap<String, Tensor> =
            tensors.iter().map(|t| (t.name.clone(), t.clone())).collect();
        let actor = RecurrentNet::from_tensors(&map, "actor", "actor_mean")?;
        let critic = RecurrentNet::from_tensors(&map, "critic", "critic_value")?;
        let log_std = map
            .get("actor_logstd")
            .ok_or_else(|| Error::Shape("missing tensor `actor_logstd`".into()))?
            .data
            .clone();
        if log_std.len() != actor.output_dim() {
            return Err(Error::Shape("actor_logstd does not match the actor head".into()));
        }
        if critic.output_dim() != 1 || critic.input_dim() != actor.input_dim() {
            return Err(Error::Shape("critic does not match the actor".into()));
        }
        Ok(Self { actor, log_std, critic })
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &NetworkWeights) {
        for (a, b) in self.params_mut().into_iter().zip(other.params()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    /// Fill every parameter with `f(index)` in parameter order.
    pub fn fill_with(&mut self, mut f: impl FnMut(usize) -> f64) {
        let mut k = 0;
        for p in self.params_mut() {
            for v in p.iter_mut() {
                *v = f(k);
                k += 1;
            }
        }
    }
}

/// Copy LSTM layers (1-based indices) of both networks from `source` into a
/// copy of `target`. Heads, `log_std` and all other layers keep the target's
/// values.
pub fn transfer_layers(
    source: &NetworkWeights,
    target: &NetworkWeights,
    layers: &[usize],
) -> Result<NetworkWeights> {
    let mut out = target.clone();
    for &k in layers {
        if k == 0 || k > source.actor.layers.len() || k > target.actor.layers.len() {
            return Err(Error::Shape(format!(
                "layer {k} does not exist in both networks (source has {}, target has {})",
                source.actor.layers.len(),
                target.actor.layers.len()
            )));
        }
        for (src, dst) in [(&source.actor, &mut out.actor), (&source.critic, &mut out.critic)] {
            let (s, d) = (&src.layers[k - 1], &mut dst.layers[k - 1]);
            if s.w_ih.shape() != d.w_ih.shape() || s.w_hh.shape() != d.w_hh.shape() {
                return Err(Error::Shape(format!(
                    "lstm_{k}: source {:?}/{:?} vs target {:?}/{:?}",
                    s.w_ih.shape(),
                    s.w_hh.shape(),
                    d.w_ih.shape(),
                    d.w_hh.shape()
                )));
            }
            *d = s.clone();
        }
    }
    Ok(out)
}
