//! Training loops: the behavior-guided agent with its policy set and
//! meta-controller, plus ε-greedy and εz-greedy DQN baselines.
//!
//! All three share the replay/target machinery and differ only in how they
//! act and which TD target they use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zeta};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{
    self, beta_probs, masked_td_update, sync_target, td_update, update_beta, ApproxError, BehaviorFunction, QFunction,
    TargetQ,
};
use crate::env::{EnvConfig, EnvError, Environment, GridObservation};
use crate::meta::{ArmWindow, EpisodeRecord, MetaError};
use crate::policy::{self, act_greedy, act_masked_greedy, PolicyError, PolicySpec};
use crate::replay::{ReplayError, ReplayMemory, Transition};
use crate::rng::{stream, Stream};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error("invalid training config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    BetaDqn,
    Dqn,
    EzGreedy,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::BetaDqn => "beta-dqn",
            AgentKind::Dqn => "dqn",
            AgentKind::EzGreedy => "ez-greedy",
        }
    }
}

/// Policy run at evaluation time by the behavior-guided agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPolicy {
    /// Greedy over β-supported actions.
    #[default]
    MaskedGreedy,
    /// Plain greedy over Q.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub kind: AgentKind,
    pub seed: u64,
    pub total_steps: usize,
    pub eval_period: usize,
    pub eval_episodes: usize,
    pub eval_epsilon: f64,
    /// Gradient updates per environment step.
    pub replay_ratio: f64,
    pub replay_capacity: usize,
    /// Transitions stored before learning starts.
    pub warmup: usize,
    pub batch_size: usize,
    /// Environment steps between target copies.
    pub target_period: usize,
    /// Defaults to the environment's discount.
    pub gamma: Option<f64>,
    pub learning_rate: f64,
    /// Step size for tabular TD updates.
    pub tabular_step: f64,
    pub hidden: usize,
    /// Support threshold ε on β.
    pub mask_epsilon: f64,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Meta-controller window length L.
    pub window: usize,
    pub normalize_returns: bool,
    pub eps_start: f64,
    pub eps_end: f64,
    /// ε decay horizon in steps; defaults to `decay_fraction · total_steps`.
    pub decay_steps: Option<usize>,
    pub decay_fraction: f64,
    /// Exponent of the zeta law for εz-greedy repeat durations.
    pub zeta_exponent: f64,
    /// Break coverage ties by per-episode (state, action) visits.
    pub episode_visit_penalty: bool,
    pub eval_policy: EvalPolicy,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: AgentKind::BetaDqn,
            seed: 0,
            total_steps: 200_000,
            eval_period: 10_000,
            eval_episodes: 30,
            eval_epsilon: 0.01,
            replay_ratio: 0.25,
            replay_capacity: 50_000,
            warmup: 1_000,
            batch_size: 32,
            target_period: approx::DEFAULT_TARGET_PERIOD,
            gamma: None,
            learning_rate: approx::DEFAULT_LEARNING_RATE,
            tabular_step: approx::DEFAULT_TABULAR_STEP,
            hidden: approx::DEFAULT_HIDDEN,
            mask_epsilon: approx::DEFAULT_MASK_EPSILON,
            deltas: policy::DEFAULT_DELTAS.to_vec(),
            alphas: policy::default_alphas(),
            window: crate::meta::DEFAULT_WINDOW,
            normalize_returns: false,
            eps_start: 1.0,
            eps_end: 0.01,
            decay_steps: None,
            decay_fraction: 0.2,
            zeta_exponent: 2.0,
            episode_visit_penalty: false,
            eval_policy: EvalPolicy::MaskedGreedy,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if self.total_steps == 0 {
            return bad("total_steps must be positive");
        }
        if self.eval_period == 0 || self.target_period == 0 || self.eval_episodes == 0 {
            return bad("eval_period, target_period and eval_episodes must be positive");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 || self.window == 0 || self.hidden == 0 {
            return bad("replay_capacity, batch_size, window and hidden must be positive");
        }
        if !(self.replay_ratio > 0.0 && self.replay_ratio <= 1.0) {
            return bad("replay_ratio must lie in (0, 1]");
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return bad("gamma must lie in (0, 1)");
            }
        }
        if !(self.mask_epsilon > 0.0 && self.mask_epsilon < 1.0) {
            return bad("mask_epsilon must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.eval_epsilon) || !(0.0..=1.0).contains(&self.eps_end) {
            return bad("exploration rates must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || self.eps_end > self.eps_start {
            return bad("eps_start must lie in [eps_end, 1]");
        }
        if self.decay_fraction.is_nan() || self.decay_fraction <= 0.0 || self.decay_steps == Some(0) {
            return bad("decay horizon must be positive");
        }
        if self.zeta_exponent.is_nan() || self.zeta_exponent <= 1.0 {
            return bad("zeta_exponent must exceed 1");
        }
        policy::build_policy_set(&self.deltas, &self.alphas)?;
        Ok(())
    }

    /// Environment steps between updates, `1 / replay_ratio` rounded.
    pub fn update_interval(&self) -> usize {
        (1.0 / self.replay_ratio).round().max(1.0) as usize
    }

    pub fn decay_horizon(&self) -> usize {
        self.decay_steps.unwrap_or_else(|| ((self.total_steps as f64 * self.decay_fraction).round() as usize).max(1))
    }

    pub fn policy_set(&self) -> Vec<PolicySpec> {
        policy::build_policy_set(&self.deltas, &self.alphas).unwrap_or_default()
    }
}

/// `start − (start − end)·t / horizon`, clipped below at `end`.
pub fn linear_epsilon(t: usize, horizon: usize, start: f64, end: f64) -> f64 {
    (start - (start - end) * t as f64 / horizon as f64).max(end)
}

/// Uniform random action with probability `epsilon`, else greedy. The flag
/// marks the random branch.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> (usize, bool) {
    if rng.random::<f64>() < epsilon {
        (rng.random_range(0..q.len()), true)
    } else {
        (act_greedy(q, rng), false)
    }
}

/// Repeat duration for εz-greedy: zeta(`exponent`) restricted to `1..=max`.
pub fn sample_duration<R: Rng + ?Sized>(exponent: f64, max: usize, rng: &mut R) -> usize {
    let zeta = Zeta::new(exponent).expect("exponent > 1");
    loop {
        let n: f64 = zeta.sample(rng);
        if n <= max as f64 {
            return n as usize;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    /// Checkpoint label: a multiple of the eval period, or the final step.
    pub step: usize,
    pub mean_return: f64,
    pub success_rate: f64,
}

/// One training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// Environment steps after this episode.
    pub step: usize,
    pub episode: usize,
    pub arm: Option<usize>,
    pub episode_return: f64,
    pub exploration_ratio: f64,
    pub length: usize,
    pub success: bool,
    /// ε at the end of the episode (baselines only).
    pub epsilon: Option<f64>,
    pub eval: Option<EvalPoint>,
    /// Episodes per arm inside the meta-controller window after this episode.
    pub arm_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisitSnapshot {
    pub step: usize,
    /// Row-major `height × width` visit counts.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct MetricsStream {
    pub kind: AgentKind,
    pub seed: u64,
    pub policies: Vec<PolicySpec>,
    pub rows: Vec<MetricsRow>,
    pub grid: (usize, usize),
    pub visits: Vec<VisitSnapshot>,
    pub updates: usize,
    pub q: QFunction,
    pub beta: Option<BehaviorFunction>,
}

impl MetricsStream {
    pub fn final_eval(&self) -> Option<EvalPoint> {
        self.rows.iter().rev().find_map(|r| r.eval)
    }

    pub fn final_visits(&self) -> Option<&VisitSnapshot> {
        self.visits.last()
    }

    pub fn evals(&self) -> impl Iterator<Item = EvalPoint> + '_ {
        self.rows.iter().filter_map(|r| r.eval)
    }
}

/// Runs a fixed policy derived from `q` (and `beta` when given): masked
/// greedy with β, greedy without, each with ε-greedy jitter.
///
/// Returns the mean undiscounted return and the fraction of episodes that
/// ended on the goal.
#[allow(clippy::too_many_arguments)]
pub fn evaluate<R: Rng + ?Sized>(
    q: &QFunction,
    beta: Option<&BehaviorFunction>,
    mask_epsilon: f64,
    env: &mut dyn Environment,
    episodes: usize,
    eval_epsilon: f64,
    rng: &mut R,
) -> Result<(f64, f64), AgentError> {
    assert!(episodes >= 1);
    let actions = env.spec().action_count;
    let mut total = 0.0;
    let mut successes = 0usize;
    for _ in 0..episodes {
        let mut obs = env.reset(rng.random());
        loop {
            let a = if eval_epsilon > 0.0 && rng.random::<f64>() < eval_epsilon {
                rng.random_range(0..actions)
            } else {
                let qv = q.q_values(&obs)?;
                match beta {
                    Some(b) => act_masked_greedy(&qv, &beta_probs(b, &obs)?, mask_epsilon, rng),
                    None => act_greedy(&qv, rng),
                }
            };
            let r = env.step(a)?;
            total += r.reward;
            if r.done() {
                successes += r.reached_goal as usize;
                break;
            }
            obs = r.next_obs;
        }
    }
    Ok((total / episodes as f64, successes as f64 / episodes as f64))
}

/// Per-episode (state, action) counts for the optional coverage tie-break.
#[derive(Debug, Default)]
struct EpisodeVisits(std::collections::HashMap<GridObservation, Vec<u32>>);

/// Stateful training loop, advanced one episode at a time.
pub struct Trainer {
    cfg: TrainConfig,
    gamma: f64,
    env: Box<dyn Environment>,
    eval_env: Box<dyn Environment>,
    q: QFunction,
    target: TargetQ,
    beta: Option<BehaviorFunction>,
    memory: ReplayMemory,
    window: ArmWindow,
    policies: Vec<PolicySpec>,
    env_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
    meta_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    eval_rng: ChaCha8Rng,
    env_steps: usize,
    episode: usize,
    updates: usize,
    next_checkpoint: usize,
    visits: Vec<u64>,
    snapshots: Vec<VisitSnapshot>,
    rows: Vec<MetricsRow>,
}

impl Trainer {
    pub fn new(env_cfg: &EnvConfig, cfg: TrainConfig) -> Result<Self, AgentError> {
        let mut env_rng = stream(cfg.seed, Stream::Env);
        let build_seed = env_rng.random();
        let env = env_cfg.build(build_seed)?;
        let eval_env = env_cfg.build(build_seed)?;
        Self::with_envs(env, eval_env, cfg)
    }

    pub fn with_envs(
        env: Box<dyn Environment>,
        eval_env: Box<dyn Environment>,
        cfg: TrainConfig,
    ) -> Result<Self, AgentError> {
        cfg.validate()?;
        let spec = env.spec().clone();
        let gamma = cfg.gamma.unwrap_or(spec.discount);
        let mut init_rng = stream(cfg.seed, Stream::Init);
        let q = QFunction::for_spec(&spec, cfg.hidden, &mut init_rng);
        let target = TargetQ::new(&q);
        let beta =
            (cfg.kind == AgentKind::BetaDqn).then(|| BehaviorFunction::for_spec(&spec, cfg.hidden, &mut init_rng));
        let policies = cfg.policy_set();
        let mut window = ArmWindow::new(cfg.window);
        window.normalize_returns = cfg.normalize_returns;
        let (w, h) = env.grid_size();
        let next_checkpoint = cfg.eval_period.min(cfg.total_steps);
        let mut env_rng = stream(cfg.seed, Stream::Env);
        let _: u64 = env_rng.random(); // consumed by the environment build seed
        Ok(Self {
            gamma,
            env,
            eval_env,
            q,
            target,
            beta,
            memory: ReplayMemory::new(cfg.replay_capacity),
            window,
            policies,
            env_rng,
            act_rng: stream(cfg.seed, Stream::Action),
            meta_rng: stream(cfg.seed, Stream::Meta),
            replay_rng: stream(cfg.seed, Stream::Replay),
            eval_rng: stream(cfg.seed, Stream::Eval),
            env_steps: 0,
            episode: 0,
            updates: 0,
            next_checkpoint,
            visits: vec![0; w * h],
            snapshots: Vec::new(),
            rows: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn finished(&self) -> bool {
        self.env_steps >= self.cfg.total_steps
    }

    pub fn env_steps(&self) -> usize {
        self.env_steps
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn q(&self) -> &QFunction {
        &self.q
    }

    pub fn beta(&self) -> Option<&BehaviorFunction> {
        self.beta.as_ref()
    }

    pub fn window(&self) -> &ArmWindow {
        &self.window
    }

    pub fn rows(&self) -> &[MetricsRow] {
        &self.rows
    }

    fn epsilon(&self) -> f64 {
        linear_epsilon(self.env_steps, self.cfg.decay_horizon(), self.cfg.eps_start, self.cfg.eps_end)
    }

    fn mark_visit(&mut self) {
        let (x, y) = self.env.agent_cell();
        let w = self.env.grid_size().0;
        self.visits[y * w + x] += 1;
    }

    fn learn(&mut self) -> Result<(), AgentError> {
        let batch = self.memory.sample(self.cfg.batch_size, &mut self.replay_rng)?;
        let lr = if matches!(self.q, QFunction::Table(_)) { self.cfg.tabular_step } else { self.cfg.learning_rate };
        match self.beta.as_mut() {
            Some(beta) => {
                masked_td_update(&mut self.q, &self.target, beta, &batch, self.cfg.mask_epsilon, self.gamma, lr)?;
                update_beta(beta, &batch, self.cfg.learning_rate)?;
            }
            None => {
                td_update(&mut self.q, &self.target, &batch, self.gamma, lr)?;
            }
        }
        self.updates += 1;
        Ok(())
    }

    /// Runs one episode (cut short at the step budget) and returns its row.
    pub fn run_episode(&mut self) -> Result<&MetricsRow, AgentError> {
        if self.finished() {
            return Err(AgentError::Config("step budget exhausted".into()));
        }
        let actions = self.env.spec().action_count;
        let max_steps = self.env.spec().max_steps;
        let arm =
            (self.cfg.kind == AgentKind::BetaDqn).then(|| self.window.select(self.policies.len(), &mut self.meta_rng));
        let mut obs = self.env.reset(self.env_rng.random());
        self.mark_visit();

        let mut episode_return = 0.0;
        let mut length = 0usize;
        let mut exploratory = 0usize;
        let mut repeat: Option<(usize, usize)> = None;
        let mut episode_visits = EpisodeVisits::default();

        let success = loop {
            let (action, explored) = match self.cfg.kind {
                AgentKind::BetaDqn => {
                    let beta = self.beta.as_ref().expect("behavior function present");
                    let qv = self.q.q_values(&obs)?;
                    let b = beta_probs(beta, &obs)?;
                    let mut tie = ChaCha8Rng::seed_from_u64(self.act_rng.random());
                    let visits = if self.cfg.episode_visit_penalty {
                        Some(episode_visits.0.entry(obs.clone()).or_insert_with(|| vec![0; actions]).clone())
                    } else {
                        None
                    };
                    let spec = self.policies[arm.expect("arm selected")];
                    let choice = policy::act(spec, &qv, &b, self.cfg.mask_epsilon, visits.as_deref(), &mut tie);
                    if self.cfg.episode_visit_penalty {
                        episode_visits.0.get_mut(&obs).expect("inserted above")[choice.action] += 1;
                    }
                    (choice.action, choice.was_exploratory)
                }
                AgentKind::Dqn => {
                    let eps = self.epsilon();
                    epsilon_greedy(&self.q.q_values(&obs)?, eps, &mut self.act_rng)
                }
                AgentKind::EzGreedy => match repeat {
                    Some((a, left)) => {
                        repeat = (left > 1).then_some((a, left - 1));
                        (a, true)
                    }
                    None if self.act_rng.random::<f64>() < self.epsilon() => {
                        let a = self.act_rng.random_range(0..actions);
                        let n = sample_duration(self.cfg.zeta_exponent, max_steps, &mut self.act_rng);
                        repeat = (n > 1).then_some((a, n - 1));
                        (a, true)
                    }
                    None => (act_greedy(&self.q.q_values(&obs)?, &mut self.act_rng), false),
                },
            };

            let step = self.env.step(action)?;
            self.env_steps += 1;
            length += 1;
            exploratory += explored as usize;
            episode_return += step.reward;
            self.mark_visit();

            let t = Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: step.next_obs.clone(),
                done: step.terminated,
            };
            if let Some(beta) = self.beta.as_mut() {
                beta.observe_insert(&t)?;
            }
            if let Some(old) = self.memory.push(t) {
                if let Some(beta) = self.beta.as_mut() {
                    beta.observe_evict(&old)?;
                }
            }
            if self.env_steps.is_multiple_of(self.cfg.update_interval()) && self.memory.len() >= self.cfg.warmup {
                self.learn()?;
            }
            sync_target(&self.q, &mut self.target, self.cfg.target_period);

            if step.done() || self.finished() {
                break step.reached_goal;
            }
            obs = step.next_obs;
        };

        let exploration_ratio = exploratory as f64 / length as f64;
        if let Some(arm) = arm {
            self.window.record(EpisodeRecord { arm, episode_return, exploration_ratio })?;
        }

        let eval = if self.env_steps >= self.next_checkpoint {
            let label = if self.finished() {
                self.cfg.total_steps
            } else {
                self.env_steps / self.cfg.eval_period * self.cfg.eval_period
            };
            let beta = match self.cfg.eval_policy {
                EvalPolicy::MaskedGreedy => self.beta.as_ref(),
                EvalPolicy::Greedy => None,
            };
            let (mean_return, success_rate) = evaluate(
                &self.q,
                beta,
                self.cfg.mask_epsilon,
                self.eval_env.as_mut(),
                self.cfg.eval_episodes,
                self.cfg.eval_epsilon,
                &mut self.eval_rng,
            )?;
            self.next_checkpoint = (label + self.cfg.eval_period).min(self.cfg.total_steps);
            self.snapshots.push(VisitSnapshot { step: label, counts: self.visits.clone() });
            Some(EvalPoint { step: label, mean_return, success_rate })
        } else {
            None
        };

        let epsilon = (self.cfg.kind != AgentKind::BetaDqn).then(|| self.epsilon());
        self.rows.push(MetricsRow {
            step: self.env_steps,
            episode: self.episode,
            arm,
            episode_return,
            exploration_ratio,
            length,
            success,
            epsilon,
            eval,
            arm_counts: if arm.is_some() { self.window.arm_counts(self.policies.len()) } else { Vec::new() },
        });
        self.episode += 1;
        Ok(self.rows.last().expect("row just pushed"))
    }

    pub fn run(mut self) -> Result<MetricsStream, AgentError> {
        while !self.finished() {
            self.run_episode()?;
        }
        Ok(MetricsStream {
            kind: self.cfg.kind,
            seed: self.cfg.seed,
            policies: if self.cfg.kind == AgentKind::BetaDqn { self.policies } else { Vec::new() },
            rows: self.rows,
            grid: self.env.grid_size(),
            visits: self.snapshots,
            updates: self.updates,
            q: self.q,
            beta: self.beta,
        })
    }
}

pub fn train(env_cfg: &EnvConfig, cfg: TrainConfig) -> Result<MetricsStream, AgentError> {
    Trainer::new(env_cfg, cfg)?.run()
}

pub fn train_beta_dqn(env_cfg: &EnvConfig, cfg: TrainConfig) -> Result<MetricsStream, AgentError> {
    train(env_cfg, TrainConfig { kind: AgentKind::BetaDqn, ..cfg })
}

pub fn train_dqn(env_cfg: &EnvConfig, cfg: TrainConfig) -> Result<MetricsStream, AgentError> {
    train(env_cfg, TrainConfig { kind: AgentKind::Dqn, ..cfg })
}

pub fn train_ez_greedy(env_cfg: &EnvConfig, cfg: TrainConfig) -> Result<MetricsStream, AgentError> {
    train(env_cfg, TrainConfig { kind: AgentKind::EzGreedy, ..cfg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::CliffWalk;

    #[test]
    fn epsilon_schedule() {
        assert_eq!(linear_epsilon(0, 1000, 1.0, 0.01), 1.0);
        assert!((linear_epsilon(1000, 1000, 1.0, 0.01) - 0.01).abs() < 1e-15);
        assert_eq!(linear_epsilon(5000, 1000, 1.0, 0.01), 0.01);
        assert!((linear_epsilon(500, 1000, 1.0, 0.01) - (1.0 - 0.99 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn duration_law_ratio() {
        // P(1)/P(2) = 2^μ = 4 for μ = 2
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = [0usize; 3];
        for _ in 0..400_000 {
            let n = sample_duration(2.0, 100, &mut rng);
            if n <= 2 {
                c[n] += 1;
            }
        }
        let ratio = c[1] as f64 / c[2] as f64;
        assert!((ratio - 4.0).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { replay_ratio: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { deltas: vec![], ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(TrainConfig::default().update_interval(), 4);
        assert_eq!(TrainConfig::default().decay_horizon(), 40_000);
    }

    #[test]
    fn perfect_cliff_policy_evaluates_to_one() {
        // Q prefers up at the start, right along row 2, down at the last column.
        let mut q = QFunction::table(48, 4);
        q.set(&GridObservation::Index(CliffWalk::encode(0, 3)), CliffWalk::UP, 1.0).unwrap();
        for x in 0..11 {
            q.set(&GridObservation::Index(CliffWalk::encode(x, 2)), CliffWalk::RIGHT, 1.0).unwrap();
        }
        q.set(&GridObservation::Index(CliffWalk::encode(11, 2)), CliffWalk::DOWN, 1.0).unwrap();
        let mut env = CliffWalk::new(0, crate::env::ObsMode::Tabular);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (ret, success) = evaluate(&q, None, 0.05, &mut env, 5, 0.0, &mut rng).unwrap();
        assert_eq!((ret, success), (1.0, 1.0));
    }
}
