//! Action-value and behavior-function approximators, tabular and MLP.
//!
//! The behavior function β estimates how often each action was taken in each
//! state by whatever collected the replay memory. The action-value function
//! bootstraps only from actions β considers supported (`β(a'|s') > ε`).

pub mod checkpoint;
pub mod mlp;

use rand::Rng;
use thiserror::Error;

use crate::env::{EnvSpec, GridObservation, ObsShape};
use crate::replay::Transition;
pub use mlp::{Adam, AdamConfig, Mlp, MlpInput};

pub const DEFAULT_HIDDEN: usize = 128;
pub const DEFAULT_LEARNING_RATE: f64 = 3e-4;
pub const DEFAULT_TABULAR_STEP: f64 = 0.1;
pub const DEFAULT_TARGET_PERIOD: usize = 1000;
pub const DEFAULT_MASK_EPSILON: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("observation does not match approximator mode ({0})")]
    ModeMismatch(&'static str),
    #[error("state index {index} out of range for {states} states")]
    StateOutOfRange { index: usize, states: usize },
    #[error("invalid action distribution: {0}")]
    InvalidDistribution(String),
    #[error("empty batch")]
    EmptyBatch,
}

/// Per-state action probabilities. Nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, ApproxError> {
        if probs.is_empty() {
            return Err(ApproxError::InvalidDistribution("no actions".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(ApproxError::InvalidDistribution(format!("{probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ApproxError::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(actions: usize) -> Self {
        Self(vec![1.0 / actions as f64; actions])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether `a` clears the support threshold, `β(a) > ε`.
    pub fn supports(&self, a: usize, epsilon: f64) -> bool {
        self.0[a] > epsilon
    }
}

fn mlp_input(s: &GridObservation) -> Result<MlpInput<'_>, ApproxError> {
    match s {
        GridObservation::Features { active, .. } => Ok(MlpInput::Binary(active)),
        GridObservation::Index(_) => Err(ApproxError::ModeMismatch("network expects feature vectors")),
    }
}

fn table_index(s: &GridObservation, states: usize) -> Result<usize, ApproxError> {
    match s {
        GridObservation::Index(i) if *i < states => Ok(*i),
        GridObservation::Index(i) => Err(ApproxError::StateOutOfRange { index: *i, states }),
        GridObservation::Features { .. } => Err(ApproxError::ModeMismatch("table expects state indices")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(states: usize, actions: usize) -> Self {
        Self { states, actions, values: vec![0.0; states * actions] }
    }

    pub fn from_values(states: usize, actions: usize, values: Vec<f64>) -> Option<Self> {
        (values.len() == states * actions).then_some(Self { states, actions, values })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }
}

/// A network together with its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct NetLearner {
    pub net: Mlp,
    pub adam: Adam,
}

impl NetLearner {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        let net = Mlp::new(input, hidden, output, rng);
        let adam = Adam::new(net.params().len(), AdamConfig::default());
        Self { net, adam }
    }

    pub fn from_net(net: Mlp) -> Self {
        let adam = Adam::new(net.params().len(), AdamConfig::default());
        Self { net, adam }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QFunction {
    Table(QTable),
    Mlp(NetLearner),
}

impl QFunction {
    pub fn table(states: usize, actions: usize) -> Self {
        QFunction::Table(QTable::new(states, actions))
    }

    pub fn mlp<R: Rng + ?Sized>(input: usize, hidden: usize, actions: usize, rng: &mut R) -> Self {
        QFunction::Mlp(NetLearner::new(input, hidden, actions, rng))
    }

    /// Table for tabular environments, network for feature environments.
    pub fn for_spec<R: Rng + ?Sized>(spec: &EnvSpec, hidden: usize, rng: &mut R) -> Self {
        match spec.shape {
            ObsShape::Tabular { state_count } => Self::table(state_count, spec.action_count),
            ObsShape::Features { dim } => Self::mlp(dim, hidden, spec.action_count, rng),
        }
    }

    pub fn action_count(&self) -> usize {
        match self {
            QFunction::Table(t) => t.actions,
            QFunction::Mlp(l) => l.net.dims().2,
        }
    }

    pub fn q_values(&self, s: &GridObservation) -> Result<Vec<f64>, ApproxError> {
        match self {
            QFunction::Table(t) => Ok(t.row(table_index(s, t.states)?).to_vec()),
            QFunction::Mlp(l) => Ok(l.net.forward(mlp_input(s)?).output),
        }
    }

    /// Overwrites one tabular entry.
    pub fn set(&mut self, s: &GridObservation, a: usize, v: f64) -> Result<(), ApproxError> {
        match self {
            QFunction::Table(t) => {
                let i = table_index(s, t.states)?;
                t.values[i * t.actions + a] = v;
                Ok(())
            }
            QFunction::Mlp(_) => Err(ApproxError::ModeMismatch("set is tabular only")),
        }
    }
}

/// Frozen snapshot of the online action-value function.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetQ {
    frozen: QFunction,
    steps_since_sync: usize,
}

impl TargetQ {
    pub fn new(q: &QFunction) -> Self {
        Self { frozen: q.clone(), steps_since_sync: 0 }
    }

    pub fn q_values(&self, s: &GridObservation) -> Result<Vec<f64>, ApproxError> {
        self.frozen.q_values(s)
    }

    pub fn steps_since_sync(&self) -> usize {
        self.steps_since_sync
    }

    pub fn force_sync(&mut self, q: &QFunction) {
        match (&mut self.frozen, q) {
            (QFunction::Mlp(dst), QFunction::Mlp(src)) => dst.net.params_mut().copy_from_slice(src.net.params()),
            (dst, src) => *dst = src.clone(),
        }
        self.steps_since_sync = 0;
    }
}

/// Counts one step and copies `q` into `target` once `period` steps have
/// elapsed since the last copy. Returns whether a copy happened.
pub fn sync_target(q: &QFunction, target: &mut TargetQ, period: usize) -> bool {
    target.steps_since_sync += 1;
    if target.steps_since_sync >= period {
        target.force_sync(q);
        true
    } else {
        false
    }
}

/// Per-state action counts that mirror the replay memory contents.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    states: usize,
    actions: usize,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn new(states: usize, actions: usize) -> Self {
        Self { states, actions, counts: vec![0; states * actions] }
    }

    pub fn from_counts(states: usize, actions: usize, counts: Vec<u64>) -> Option<Self> {
        (counts.len() == states * actions).then_some(Self { states, actions, counts })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row(&self, s: usize) -> &[u64] {
        &self.counts[s * self.actions..(s + 1) * self.actions]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BehaviorFunction {
    Counts(CountTable),
    Mlp(NetLearner),
}

impl BehaviorFunction {
    pub fn counts(states: usize, actions: usize) -> Self {
        BehaviorFunction::Counts(CountTable::new(states, actions))
    }

    pub fn mlp<R: Rng + ?Sized>(input: usize, hidden: usize, actions: usize, rng: &mut R) -> Self {
        BehaviorFunction::Mlp(NetLearner::new(input, hidden, actions, rng))
    }

    pub fn for_spec<R: Rng + ?Sized>(spec: &EnvSpec, hidden: usize, rng: &mut R) -> Self {
        match spec.shape {
            ObsShape::Tabular { state_count } => Self::counts(state_count, spec.action_count),
            ObsShape::Features { dim } => Self::mlp(dim, hidden, spec.action_count, rng),
        }
    }

    pub fn action_count(&self) -> usize {
        match self {
            BehaviorFunction::Counts(c) => c.actions,
            BehaviorFunction::Mlp(l) => l.net.dims().2,
        }
    }

    /// Tracks a transition entering the replay memory. No-op for networks.
    pub fn observe_insert(&mut self, t: &Transition) -> Result<(), ApproxError> {
        if let BehaviorFunction::Counts(c) = self {
            let s = table_index(&t.state, c.states)?;
            c.counts[s * c.actions + t.action] += 1;
        }
        Ok(())
    }

    /// Tracks a transition evicted from the replay memory.
    pub fn observe_evict(&mut self, t: &Transition) -> Result<(), ApproxError> {
        if let BehaviorFunction::Counts(c) = self {
            let s = table_index(&t.state, c.states)?;
            let slot = &mut c.counts[s * c.actions + t.action];
            debug_assert!(*slot > 0, "evicting an untracked transition");
            *slot = slot.saturating_sub(1);
        }
        Ok(())
    }
}

pub fn beta_probs(b: &BehaviorFunction, s: &GridObservation) -> Result<ActionDistribution, ApproxError> {
    match b {
        BehaviorFunction::Counts(c) => {
            let row = c.row(table_index(s, c.states)?);
            let total: u64 = row.iter().sum();
            if total == 0 {
                return Ok(ActionDistribution::uniform(c.actions));
            }
            Ok(ActionDistribution(row.iter().map(|&n| n as f64 / total as f64).collect()))
        }
        BehaviorFunction::Mlp(l) => Ok(ActionDistribution(mlp::softmax(&l.net.forward(mlp_input(s)?).output))),
    }
}

/// Fits β to a replay batch.
///
/// Counts mode already mirrors the memory through
/// [`BehaviorFunction::observe_insert`]/[`BehaviorFunction::observe_evict`],
/// so this only reports the batch negative log-likelihood. Network mode takes
/// one Adam step on the cross-entropy and returns the pre-step loss.
pub fn update_beta(b: &mut BehaviorFunction, batch: &[&Transition], learning_rate: f64) -> Result<f64, ApproxError> {
    if batch.is_empty() {
        return Err(ApproxError::EmptyBatch);
    }
    match b {
        BehaviorFunction::Counts(_) => {
            let mut nll = 0.0;
            for t in batch {
                nll -= beta_probs(b, &t.state)?.0[t.action].ln();
            }
            Ok(nll / batch.len() as f64)
        }
        BehaviorFunction::Mlp(l) => {
            let inputs = batch.iter().map(|t| mlp_input(&t.state)).collect::<Result<Vec<_>, _>>()?;
            let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
            let (loss, grad) = mlp::cross_entropy_loss(&l.net, &inputs, &actions);
            l.adam.step(l.net.params_mut(), &grad, learning_rate);
            Ok(loss)
        }
    }
}

/// Bootstrapped target `r + γ max_{a'} Q(s', a')`.
///
/// With `support = Some((β, ε))` the max only ranges over actions with
/// `β(a'|s') > ε`, falling back to all actions when none qualify.
pub fn td_target(
    reward: f64,
    done: bool,
    gamma: f64,
    next_q: &[f64],
    support: Option<(&ActionDistribution, f64)>,
) -> f64 {
    if done {
        return reward;
    }
    let unmasked = || next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = match support {
        None => unmasked(),
        Some((beta, eps)) => {
            let masked = next_q
                .iter()
                .enumerate()
                .filter(|(a, _)| beta.supports(*a, eps))
                .map(|(_, &q)| q)
                .fold(f64::NEG_INFINITY, f64::max);
            if masked == f64::NEG_INFINITY {
                unmasked()
            } else {
                masked
            }
        }
    };
    reward + gamma * best
}

fn apply_td(q: &mut QFunction, batch: &[&Transition], targets: &[f64], learning_rate: f64) -> Result<f64, ApproxError> {
    match q {
        QFunction::Table(t) => {
            let mut loss = 0.0;
            for (tr, &y) in batch.iter().zip(targets) {
                let i = table_index(&tr.state, t.states)? * t.actions + tr.action;
                let err = y - t.values[i];
                loss += err * err;
                t.values[i] += learning_rate * err;
            }
            Ok(loss / batch.len() as f64)
        }
        QFunction::Mlp(l) => {
            let inputs = batch.iter().map(|t| mlp_input(&t.state)).collect::<Result<Vec<_>, _>>()?;
            let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
            let (loss, grad) = mlp::squared_td_loss(&l.net, &inputs, &actions, targets);
            l.adam.step(l.net.params_mut(), &grad, learning_rate);
            Ok(loss)
        }
    }
}

/// In-sample TD step: bootstraps only from β-supported next actions.
/// Returns the mean squared TD error before the step.
pub fn masked_td_update(
    q: &mut QFunction,
    target: &TargetQ,
    b: &BehaviorFunction,
    batch: &[&Transition],
    epsilon: f64,
    gamma: f64,
    learning_rate: f64,
) -> Result<f64, ApproxError> {
    if batch.is_empty() {
        return Err(ApproxError::EmptyBatch);
    }
    let mut targets = Vec::with_capacity(batch.len());
    for t in batch {
        let y = if t.done {
            t.reward
        } else {
            let next_q = target.q_values(&t.next_state)?;
            let beta = beta_probs(b, &t.next_state)?;
            td_target(t.reward, false, gamma, &next_q, Some((&beta, epsilon)))
        };
        targets.push(y);
    }
    apply_td(q, batch, &targets, learning_rate)
}

/// Standard TD step bootstrapping from the unrestricted max.
pub fn td_update(
    q: &mut QFunction,
    target: &TargetQ,
    batch: &[&Transition],
    gamma: f64,
    learning_rate: f64,
) -> Result<f64, ApproxError> {
    if batch.is_empty() {
        return Err(ApproxError::EmptyBatch);
    }
    let mut targets = Vec::with_capacity(batch.len());
    for t in batch {
        let y =
            if t.done { t.reward } else { td_target(t.reward, false, gamma, &target.q_values(&t.next_state)?, None) };
        targets.push(y);
    }
    apply_td(q, batch, &targets, learning_rate)
}
