//! Deep Q-network that clears the syndromes the greedy stage leaves behind.
//!
//! States are one-hot encoded syndromes, actions index the greedy action set.
//! Training is a single sequential loop with experience replay and a
//! periodically synchronised target network; optimisation is plain SGD on the
//! mean squared TD error, with hand-written backpropagation.

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::NoiseModel;
use crate::decoder_greedy::{greedy_decode, ActionTable};
use crate::error::{Error, Result};
use crate::linalg::{FieldArith, Zq};
use crate::stabilizer::{PauliVec, StabilizerCode, Syndrome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lr: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Gradient updates between target-network copies.
    pub target_sync_interval: u64,
    /// Number of training episodes; samples with a zero greedy residual do not count.
    pub episodes: u64,
    pub max_steps: usize,
    pub p_train: f64,
    pub r_success: f64,
    pub r_step: f64,
    pub r_timeout: f64,
    pub hidden: Vec<usize>,
    /// Extra relabelled copies stored per real transition (see [`relabel`]).
    pub relabel_per_step: usize,
    /// Relabelled goals lie at most this many steps after the transition.
    pub relabel_horizon: usize,
    /// Probability per episode of also storing the known-error inverse as a
    /// demonstration trajectory.
    pub demo_prob: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.5,
            lr: 1e-2,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 300_000,
            buffer_capacity: 100_000,
            batch_size: 64,
            target_sync_interval: 1_000,
            episodes: 100_000,
            max_steps: 10,
            p_train: 0.05,
            r_success: 1.0,
            r_step: -0.1,
            r_timeout: -1.0,
            hidden: vec![128, 128],
            relabel_per_step: 0,
            relabel_horizon: 3,
            demo_prob: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.gamma) {
            return Err(Error::validation(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !unit(self.eps_start) || !unit(self.eps_end) {
            return Err(Error::validation("epsilon values must lie in [0, 1]"));
        }
        if !unit(self.demo_prob) {
            return Err(Error::validation(format!("demo_prob {} outside [0, 1]", self.demo_prob)));
        }
        if !unit(self.p_train) {
            return Err(Error::validation(format!("p_train {} outside [0, 1]", self.p_train)));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::validation(format!("learning rate {} must be positive", self.lr)));
        }
        if self.max_steps == 0 || self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::validation("need max_steps ≥ 1, batch_size ≥ 1 and buffer_capacity ≥ batch_size"));
        }
        if self.relabel_per_step > 0 && self.relabel_horizon == 0 {
            return Err(Error::validation("relabel_horizon must be positive when relabelling"));
        }
        if self.target_sync_interval == 0 {
            return Err(Error::validation("target_sync_interval must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::validation("hidden layer widths must be positive"));
        }
        if ![self.r_success, self.r_step, self.r_timeout].iter().all(|r| r.is_finite()) {
            return Err(Error::validation("rewards must be finite"));
        }
        Ok(())
    }

    /// Linear decay from `eps_start` to `eps_end` over `eps_decay_steps` agent steps.
    pub fn epsilon(&self, agent_steps: u64) -> f64 {
        if agent_steps >= self.eps_decay_steps {
            return self.eps_end;
        }
        let t = agent_steps as f64 / self.eps_decay_steps as f64;
        self.eps_start + t * (self.eps_end - self.eps_start)
    }
}

/// Concatenated one-hot blocks, one block of length `q` per syndrome entry.
pub fn encode_state(q: u8, s: &Syndrome) -> Vec<f64> {
    let q = q as usize;
    let mut x = vec![0.0; s.len() * q];
    for (i, &v) in s.0.iter().enumerate() {
        x[i * q + v as usize] = 1.0;
    }
    x
}

pub fn decode_state(q: u8, x: &[f64]) -> Result<Syndrome> {
    let q = q as usize;
    if q == 0 || !x.len().is_multiple_of(q) {
        return Err(Error::validation("encoded state length is not a multiple of q"));
    }
    x.chunks(q)
        .map(|block| {
            let hot: Vec<usize> = block.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
            match hot.as_slice() {
                [i] if block[*i] == 1.0 => Ok(*i as u8),
                _ => Err(Error::validation("block is not one-hot")),
            }
        })
        .collect::<Result<Vec<u8>>>()
        .map(Syndrome)
}

/// One environment transition: apply action `action_idx` to syndrome `s`.
pub fn step_env(
    table: &ActionTable,
    s: &Syndrome,
    action_idx: usize,
    steps_taken: usize,
    cfg: &TrainConfig,
) -> (Syndrome, f64, bool) {
    let next = table.apply(s, action_idx);
    if next.is_zero() {
        (next, cfg.r_success, true)
    } else if steps_taken + 1 >= cfg.max_steps {
        (next, cfg.r_timeout, true)
    } else {
        (next, cfg.r_step, false)
    }
}

const OUTPUT_INIT_SCALE: f64 = 0.01;

/// Dense network with rectifier hidden layers and a linear output layer.
/// `weights[l][i * out + o]` connects input `i` to output `o` of layer `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl QNetwork {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::validation("need at least two nonzero layer sizes"));
        }
        let weights = layer_sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = layer_sizes[1..].iter().map(|&o| vec![0.0; o]).collect();
        Ok(QNetwork { layer_sizes: layer_sizes.to_vec(), weights, biases })
    }

    /// He-uniform weights, zero biases. The output layer is scaled down so
    /// initial Q-values start near zero.
    pub fn random(layer_sizes: &[usize], rng: &mut dyn RngCore) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        let last = net.weights.len() - 1;
        for (l, w) in net.weights.iter_mut().enumerate() {
            let scale = if l == last { OUTPUT_INIT_SCALE } else { 1.0 };
            let bound = scale * (6.0 / layer_sizes[l] as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn from_parts(layer_sizes: Vec<usize>, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        let net = QNetwork { layer_sizes, weights, biases };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let ls = &self.layer_sizes;
        if ls.len() < 2 || ls.contains(&0) {
            return Err(Error::validation("need at least two nonzero layer sizes"));
        }
        if self.weights.len() != ls.len() - 1 || self.biases.len() != ls.len() - 1 {
            return Err(Error::validation("layer count does not match parameter arrays"));
        }
        for l in 0..ls.len() - 1 {
            if self.weights[l].len() != ls[l] * ls[l + 1] || self.biases[l].len() != ls[l + 1] {
                return Err(Error::validation(format!("layer {l} parameter shape mismatch")));
            }
        }
        if !self.params().all(f64::is_finite) {
            return Err(Error::validation("non-finite parameter"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(&self.biases).flatten().copied()
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut()).flatten()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_len() {
            return Err(Error::validation(format!("input length {} != {}", x.len(), self.input_len())));
        }
        Ok(self.forward_unchecked(x))
    }

    fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut acts = self.forward_trace(x);
        acts.pop().unwrap()
    }

    /// Activations of every layer, input first. Hidden entries are post-rectifier.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let nl = self.weights.len();
        let mut acts = Vec::with_capacity(nl + 1);
        acts.push(x.to_vec());
        for l in 0..nl {
            let out = self.layer_sizes[l + 1];
            let mut z = self.biases[l].clone();
            for (i, &xi) in acts[l].iter().enumerate() {
                if xi != 0.0 {
                    let row = &self.weights[l][i * out..(i + 1) * out];
                    for (zo, &w) in z.iter_mut().zip(row) {
                        *zo += xi * w;
                    }
                }
            }
            if l + 1 < nl {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    /// Accumulates `g · ∂Q(x, action)/∂θ` into `grad`.
    fn backprop_into(&self, acts: &[Vec<f64>], action: usize, g: f64, grad: &mut QNetwork) {
        let nl = self.weights.len();
        let out = self.output_len();
        grad.biases[nl - 1][action] += g;
        // The output delta is zero except at `action`.
        let mut delta = vec![0.0; self.layer_sizes[nl - 1]];
        for (i, &xi) in acts[nl - 1].iter().enumerate() {
            if xi != 0.0 {
                grad.weights[nl - 1][i * out + action] += xi * g;
                if nl > 1 {
                    delta[i] = self.weights[nl - 1][i * out + action] * g;
                }
            }
        }
        for l in (0..nl - 1).rev() {
            let out = self.layer_sizes[l + 1];
            for (b, &d) in grad.biases[l].iter_mut().zip(&delta) {
                *b += d;
            }
            let input = &acts[l];
            let mut prev = vec![0.0; self.layer_sizes[l]];
            for (i, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    // zero inputs get no weight gradient; a zero hidden unit is
                    // also inactive, so its back-propagated delta is masked below
                    continue;
                }
                let grow = &mut grad.weights[l][i * out..(i + 1) * out];
                for (gw, &d) in grow.iter_mut().zip(&delta) {
                    *gw += xi * d;
                }
                if l > 0 {
                    let wrow = &self.weights[l][i * out..(i + 1) * out];
                    prev[i] = wrow.iter().zip(&delta).map(|(w, d)| w * d).sum();
                }
            }
            delta = prev;
        }
    }

    /// Index of the largest Q-value; lowest index on ties.
    pub fn greedy_action(&self, x: &[f64]) -> usize {
        argmax(&self.forward_unchecked(x))
    }

    pub fn to_text(&self, cfg: &TrainConfig) -> String {
        let file = ModelFile { network: self.clone(), config: cfg.clone() };
        let mut s = serde_json::to_string(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, cfg: &TrainConfig, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text(cfg)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(QNetwork, TrainConfig)> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::format(path.as_ref(), e))?;
        file.network.validate().map_err(|e| Error::format(path.as_ref(), e))?;
        Ok((file.network, file.config))
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    network: QNetwork,
    config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Syndrome,
    pub action: usize,
    pub reward: f64,
    pub next_state: Syndrome,
    pub done: bool,
}

fn td_target(target_net: &QNetwork, q: u8, t: &Transition, gamma: f64) -> f64 {
    if t.done {
        t.reward
    } else {
        let next = target_net.forward_unchecked(&encode_state(q, &t.next_state));
        t.reward + gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mean squared TD error over the batch and its gradient with respect to the
/// online network. The target network is held fixed.
pub fn loss_and_gradient(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: &[Transition],
    q: u8,
    gamma: f64,
) -> (f64, QNetwork) {
    let mut grad = QNetwork::zeros(&net.layer_sizes).expect("shape already validated");
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for t in batch {
        let y = td_target(target_net, q, t, gamma);
        let acts = net.forward_trace(&encode_state(q, &t.state));
        let delta = acts.last().unwrap()[t.action] - y;
        loss += delta * delta * scale;
        net.backprop_into(&acts, t.action, 2.0 * delta * scale, &mut grad);
    }
    (loss, grad)
}

/// Mean squared TD error only.
pub fn td_loss(net: &QNetwork, target_net: &QNetwork, batch: &[Transition], q: u8, gamma: f64) -> f64 {
    let scale = 1.0 / batch.len() as f64;
    batch
        .iter()
        .map(|t| {
            let y = td_target(target_net, q, t, gamma);
            let delta = net.forward_unchecked(&encode_state(q, &t.state))[t.action] - y;
            delta * delta * scale
        })
        .sum()
}

/// One SGD step on the batch; returns the loss before the step.
pub fn td_update(net: &mut QNetwork, target_net: &QNetwork, batch: &[Transition], q: u8, cfg: &TrainConfig) -> f64 {
    assert!(!batch.is_empty(), "td_update needs a nonempty batch");
    let (loss, grad) = loss_and_gradient(net, target_net, batch, q, cfg.gamma);
    for (p, g) in net.params_mut().zip(grad.params()) {
        *p -= cfg.lr * g;
    }
    loss
}

/// Fixed-capacity ring buffer of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity, items: Vec::with_capacity(capacity.min(1 << 16)), next: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, k: usize, rng: &mut impl Rng) -> Vec<Transition> {
        (0..k).map(|_| self.items[rng.random_range(0..self.items.len())].clone()).collect()
    }
}

/// Rewrites transition `t` of an episode as if the goal had been the state
/// reached at step `goal`: the syndrome dynamics are translation invariant,
/// so shifting every state by `−states[goal]` gives a valid trajectory that
/// ends at zero after `goal` steps. `states[i]` is the state before action `i`.
pub fn relabel(
    table: &ActionTable,
    states: &[Syndrome],
    actions: &[usize],
    t: usize,
    goal: usize,
    cfg: &TrainConfig,
) -> Option<Transition> {
    let f = Zq(table.q());
    let shift = |s: &Syndrome| Syndrome(s.0.iter().zip(&states[goal].0).map(|(&a, &g)| f.sub(a, g)).collect());
    let state = shift(&states[t]);
    if state.is_zero() {
        return None;
    }
    let (next_state, reward, done) = step_env(table, &state, actions[t], t, cfg);
    Some(Transition { state, action: actions[t], reward, next_state, done })
}

/// Replays `actions` from `start` into the buffer. Demonstrations longer
/// than `max_steps` are dropped.
fn push_demonstration(
    table: &ActionTable,
    start: &Syndrome,
    actions: &[usize],
    cfg: &TrainConfig,
    buffer: &mut ReplayBuffer,
) {
    if actions.len() > cfg.max_steps {
        return;
    }
    let mut s = start.clone();
    for (t, &a) in actions.iter().enumerate() {
        let (next, reward, done) = step_env(table, &s, a, t, cfg);
        buffer.push(Transition { state: s, action: a, reward, next_state: next.clone(), done });
        if done {
            break;
        }
        s = next;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub episodes: u64,
    pub solved_episodes: u64,
    pub noise_samples: u64,
    pub agent_steps: u64,
    pub updates: u64,
    /// Fraction of solved episodes within each tenth of training.
    pub solved_by_decile: Vec<f64>,
}

/// Consecutive noise samples with zero greedy residual tolerated before
/// training gives up.
const MAX_EMPTY_SAMPLES: u64 = 1_000_000;

pub fn train(code: &StabilizerCode, noise: &dyn NoiseModel, cfg: &TrainConfig) -> Result<(QNetwork, TrainReport)> {
    cfg.validate()?;
    let table = ActionTable::new(code);
    let (q, n) = (code.q(), code.n());
    let mut sizes = vec![code.num_checks() * q as usize];
    sizes.extend(&cfg.hidden);
    sizes.push(table.len());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = QNetwork::random(&sizes, &mut rng)?;
    let mut target = net.clone();
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut report = TrainReport::default();
    let decile = cfg.episodes.div_ceil(10).max(1);
    let mut decile_solved = 0u64;
    let mut empty_run = 0u64;

    while report.episodes < cfg.episodes {
        let e = noise.sample_error(q, n, &mut rng);
        report.noise_samples += 1;
        let greedy = greedy_decode(&table, n, &code.syndrome(&e), 2 * n);
        if greedy.residual.is_zero() {
            empty_run += 1;
            if empty_run >= MAX_EMPTY_SAMPLES {
                return Err(Error::validation(format!(
                    "{MAX_EMPTY_SAMPLES} consecutive noise samples left no greedy residual; raise p_train"
                )));
            }
            continue;
        }
        empty_run = 0;

        if cfg.demo_prob > 0.0 && rng.random::<f64>() < cfg.demo_prob {
            let mut r = e.clone();
            r.add_assign(q, &greedy.correction);
            push_demonstration(&table, &greedy.residual, &table.inverse_actions(&r), cfg, &mut buffer);
        }

        let mut s = greedy.residual;
        let mut states = vec![s.clone()];
        let mut actions = Vec::new();
        for t in 0..cfg.max_steps {
            let a = if rng.random::<f64>() < cfg.epsilon(report.agent_steps) {
                rng.random_range(0..table.len())
            } else {
                net.greedy_action(&encode_state(q, &s))
            };
            let (next, reward, done) = step_env(&table, &s, a, t, cfg);
            report.agent_steps += 1;
            let solved = next.is_zero();
            buffer.push(Transition { state: s, action: a, reward, next_state: next.clone(), done });
            actions.push(a);
            states.push(next.clone());
            if buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(cfg.batch_size, &mut rng);
                td_update(&mut net, &target, &batch, q, cfg);
                report.updates += 1;
                if report.updates % cfg.target_sync_interval == 0 {
                    target = net.clone();
                }
            }
            s = next;
            if solved {
                report.solved_episodes += 1;
                decile_solved += 1;
            }
            if done {
                break;
            }
        }
        for t in 0..actions.len() {
            for _ in 0..cfg.relabel_per_step {
                let goal = rng.random_range(t + 1..=actions.len().min(t + cfg.relabel_horizon));
                if let Some(tr) = relabel(&table, &states, &actions, t, goal, cfg) {
                    buffer.push(tr);
                }
            }
        }
        report.episodes += 1;
        if report.episodes % decile == 0 || report.episodes == cfg.episodes {
            let len = report.episodes - (report.episodes - 1) / decile * decile;
            report.solved_by_decile.push(decile_solved as f64 / len as f64);
            decile_solved = 0;
        }
    }
    net.validate().map_err(|e| Error::Internal(format!("training diverged: {e}")))?;
    Ok((net, report))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlOutcome {
    pub correction: PauliVec,
    pub final_syndrome: Syndrome,
    pub steps: usize,
}

/// Follows the greedy policy of `net` from `s_res` until the syndrome is zero
/// or `max_steps` actions were taken.
pub fn rl_decode(table: &ActionTable, n: usize, net: &QNetwork, s_res: &Syndrome, max_steps: usize) -> RlOutcome {
    let q = table.q();
    let mut s = s_res.clone();
    let mut correction = PauliVec::identity(n);
    let mut steps = 0;
    while !s.is_zero() && steps < max_steps {
        let a = net.greedy_action(&encode_state(q, &s));
        s = table.apply(&s, a);
        table.action(a).apply_to(q, &mut correction);
        steps += 1;
    }
    RlOutcome { correction, final_syndrome: s, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Xz3;

    fn k13_code() -> StabilizerCode {
        crate::presets::qutrit_k13().unwrap()
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig { episodes: 300, hidden: vec![16, 16], batch_size: 16, eps_decay_steps: 500, ..Default::default() }
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_state(3, &Syndrome(vec![0, 0])), vec![1., 0., 0., 1., 0., 0.]);
        assert_eq!(encode_state(3, &Syndrome(vec![2, 0])), vec![0., 0., 1., 1., 0., 0.]);
        assert!(decode_state(3, &[1., 1., 0.]).is_err());
        assert!(decode_state(3, &[1., 0.]).is_err());
    }

    #[test]
    fn step_env_examples() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        let cfg = TrainConfig::default();
        let s = code.syndrome(&PauliVec::single(27, 5, 1, 0));
        // X² on qudit 5 is the inverse of X¹
        let inv = t.actions().iter().position(|a| a.qudit == 5 && a.exponent == 2).unwrap();
        assert_eq!(step_env(&t, &s, inv, 0, &cfg), (Syndrome::zeros(14), cfg.r_success, true));

        let x1 = t.actions().iter().position(|a| a.qudit == 3).unwrap();
        let mut cur = s.clone();
        for k in 0..3 {
            let (next, r, done) = step_env(&t, &cur, x1, k, &cfg);
            assert!(!done && r == cfg.r_step || k == 2);
            cur = next;
        }
        assert_eq!(cur, s);

        let (_, r, done) = step_env(&t, &s, x1, cfg.max_steps - 1, &cfg);
        assert_eq!((r, done), (cfg.r_timeout, true));
    }

    #[test]
    fn forward_examples() {
        let z = QNetwork::zeros(&[6, 5, 4]).unwrap();
        assert_eq!(z.forward(&[1., 0., 0., 0., 1., 0.]).unwrap(), vec![0.0; 4]);
        assert!(z.forward(&[1.0; 5]).is_err());

        let mut w = vec![0.0; 16];
        for i in 0..4 {
            w[i * 4 + i] = 1.0;
        }
        let id = QNetwork::from_parts(vec![4, 4], vec![w], vec![vec![0.0; 4]]).unwrap();
        assert_eq!(id.forward(&[0.5, -1.0, 2.0, 0.0]).unwrap(), vec![0.5, -1.0, 2.0, 0.0]);
    }

    #[test]
    fn random_outputs_are_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::random(&[42, 32, 32, 108], &mut rng).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..42).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(net.forward(&x).unwrap().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn from_parts_rejects_bad_shapes() {
        assert!(QNetwork::from_parts(vec![2, 2], vec![vec![0.0; 3]], vec![vec![0.0; 2]]).is_err());
        assert!(QNetwork::from_parts(vec![1, 1], vec![vec![f64::NAN]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn terminal_zero_reward_batch_is_a_fixed_point() {
        let mut net = QNetwork::zeros(&[6, 12, 12, 4]).unwrap();
        let target = net.clone();
        let before = net.clone();
        let t = Transition {
            state: Syndrome(vec![1, 2]),
            action: 2,
            reward: 0.0,
            next_state: Syndrome(vec![0, 0]),
            done: true,
        };
        let loss = td_update(&mut net, &target, &[t.clone(), t], 3, &TrainConfig::default());
        assert_eq!(loss, 0.0);
        assert_eq!(net, before);
    }

    fn random_transition(rng: &mut ChaCha8Rng) -> Transition {
        let s = |rng: &mut ChaCha8Rng| Syndrome((0..2).map(|_| rng.random_range(0..3u8)).collect());
        Transition {
            state: s(rng),
            action: rng.random_range(0..4),
            reward: rng.random_range(-1.0..1.0),
            next_state: s(rng),
            done: rng.random_bool(0.3),
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let mut net = QNetwork::zeros(&[6, 12, 12, 4]).unwrap();
            for w in net.weights.iter_mut().flatten() {
                *w = rng.random_range(-0.7..0.7);
            }
            for b in net.biases.iter_mut().flatten() {
                *b = rng.random_range(-0.1..0.1);
            }
            let target = QNetwork::random(&[6, 12, 12, 4], &mut rng).unwrap();
            let batch: Vec<Transition> = (0..8).map(|_| random_transition(&mut rng)).collect();
            let (_, grad) = loss_and_gradient(&net, &target, &batch, 3, 0.9);
            let analytic: Vec<f64> = grad.params().collect();
            for (idx, &a) in analytic.iter().enumerate() {
                let mut plus = net.clone();
                *plus.params_mut().nth(idx).unwrap() += h;
                let mut minus = net.clone();
                *minus.params_mut().nth(idx).unwrap() -= h;
                let numeric =
                    (td_loss(&plus, &target, &batch, 3, 0.9) - td_loss(&minus, &target, &batch, 3, 0.9)) / (2.0 * h);
                let denom = a.abs().max(numeric.abs());
                if denom > 1e-7 {
                    worst = worst.max((a - numeric).abs() / denom);
                } else {
                    worst = worst.max((a - numeric).abs());
                }
            }
        }
        assert!(worst <= 1e-4, "max relative error {worst}");
    }

    #[test]
    fn loss_decreases_on_fixed_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = QNetwork::random(&[6, 12, 12, 4], &mut rng).unwrap();
        let target = net.clone();
        let batch = vec![Transition {
            state: Syndrome(vec![1, 0]),
            action: 1,
            reward: 1.0,
            next_state: Syndrome(vec![0, 0]),
            done: true,
        }];
        let cfg = TrainConfig { lr: 1e-2, ..Default::default() };
        let first = td_loss(&net, &target, &batch, 3, cfg.gamma);
        for _ in 0..100 {
            td_update(&mut net, &target, &batch, 3, &cfg);
        }
        let last = td_loss(&net, &target, &batch, 3, cfg.gamma);
        assert!(last < first * 0.5, "{first} → {last}");
    }

    #[test]
    fn replay_buffer_wraps() {
        let mut b = ReplayBuffer::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..5 {
            let mut t = random_transition(&mut rng);
            t.action = i;
            b.push(t);
        }
        assert_eq!(b.len(), 3);
        let mut seen: Vec<usize> = b.items.iter().map(|t| t.action).collect();
        seen.sort();
        assert_eq!(seen, vec![2, 3, 4]);
    }

    #[test]
    fn zero_episodes_gives_seeded_init() {
        let code = k13_code();
        let noise = Xz3::new(0.05).unwrap();
        let cfg = TrainConfig { episodes: 0, ..small_cfg() };
        let (a, r) = train(&code, &noise, &cfg).unwrap();
        let (b, _) = train(&code, &noise, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(r.updates, 0);
        assert_eq!(a.layer_sizes(), &[42, 16, 16, 108]);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        assert_eq!(a, QNetwork::random(&[42, 16, 16, 108], &mut rng).unwrap());
    }

    #[test]
    fn training_is_deterministic() {
        let code = k13_code();
        let noise = Xz3::new(0.05).unwrap();
        let cfg = small_cfg();
        let (a, ra) = train(&code, &noise, &cfg).unwrap();
        let (b, rb) = train(&code, &noise, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert!(a.params().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let (c, _) = train(&code, &noise, &TrainConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_noise_is_rejected_rather_than_looping() {
        let code = k13_code();
        let noise = Xz3::new(0.0).unwrap();
        assert!(train(&code, &noise, &TrainConfig { episodes: 1, ..small_cfg() }).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let code = k13_code();
        let noise = Xz3::new(0.05).unwrap();
        let cfg = small_cfg();
        let (net, _) = train(&code, &noise, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        net.save(&cfg, &path).unwrap();
        let (back, cfg2) = QNetwork::load(&path).unwrap();
        assert_eq!(cfg2, cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let s = Syndrome((0..14).map(|_| rng.random_range(0..3u8)).collect());
            let x = encode_state(3, &s);
            let (a, b) = (net.forward(&x).unwrap(), back.forward(&x).unwrap());
            assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn rl_decode_bookkeeping() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = QNetwork::random(&[42, 16, 108], &mut rng).unwrap();
        let out = rl_decode(&t, 27, &net, &Syndrome::zeros(14), 10);
        assert_eq!(out.steps, 0);
        assert!(out.correction.is_identity());
        let f = Zq(3);
        for _ in 0..50 {
            let s = Syndrome((0..14).map(|_| rng.random_range(0..3u8)).collect());
            let out = rl_decode(&t, 27, &net, &s, 7);
            assert!(out.steps <= 7);
            let sc = code.syndrome(&out.correction);
            let expect: Vec<u8> = out.final_syndrome.0.iter().zip(&s.0).map(|(&r, &a)| f.sub(r, a)).collect();
            assert_eq!(sc.0, expect);
        }
    }
}
