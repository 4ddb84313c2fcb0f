//! One-shot CliffWalk study: the action each policy takes when the replay
//! memory holds a single detour trajectory, plus a β-DQN vs DQN sweep whose
//! report carries the visit heatmaps and selection traces.

use std::path::{Path, PathBuf};

use anyhow::Result;
use betadqn_core::agent::{AgentKind, TrainConfig};
use betadqn_core::approx::{beta_probs, masked_td_update, BehaviorFunction, QFunction, TargetQ};
use betadqn_core::env::{CliffWalk, EnvConfig, Environment, GridObservation};
use betadqn_core::policy::{act, act_greedy, act_masked_greedy, default_policy_set};
use betadqn_core::replay::{ReplayMemory, Transition};
use betadqn_core::rng::{stream, Stream};
use rand::Rng;

use crate::config::{ExperimentConfig, SweepConfig};
use crate::run::{run_sweep, SweepOutcome};

pub const POLICY_ACTIONS_FILE: &str = "policy_actions.csv";

/// Up two rows, along the top of the safe area, then down to the goal.
pub fn detour_actions() -> Vec<usize> {
    let mut a = vec![CliffWalk::UP; 2];
    a.extend(std::iter::repeat_n(CliffWalk::RIGHT, 11));
    a.extend(std::iter::repeat_n(CliffWalk::DOWN, 2));
    a
}

/// Fills a memory with the detour, fits β by counts and Q by masked TD from
/// a small random start, then records every policy's action in every
/// non-cliff state.
pub fn policy_actions(seed: u64) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut env = CliffWalk::new(seed, Default::default());
    let mut memory = ReplayMemory::new(1000);
    let mut beta = BehaviorFunction::counts(48, 4);
    let mut obs = env.reset(seed);
    for a in detour_actions() {
        let r = env.step(a)?;
        let t =
            Transition { state: obs, action: a, reward: r.reward, next_state: r.next_obs.clone(), done: r.terminated };
        beta.observe_insert(&t)?;
        memory.push(t);
        obs = r.next_obs;
    }
    let mut init = stream(seed, Stream::Init);
    let mut q = QFunction::table(48, 4);
    for s in 0..48 {
        for a in 0..4 {
            q.set(&GridObservation::Index(s), a, init.random_range(-0.1..0.1))?;
        }
    }
    let mut target = TargetQ::new(&q);
    let batch: Vec<&Transition> = memory.iter().collect();
    for _ in 0..200 {
        masked_td_update(&mut q, &target, &beta, &batch, 0.05, 0.9, 0.5)?;
        target.force_sync(&q);
    }

    let policies = default_policy_set();
    let mut header = vec!["x".to_string(), "y".into(), "greedy".into(), "masked_greedy".into()];
    header.extend(policies.iter().map(|p| p.label()));
    let mut rows = Vec::new();
    let mut tie = stream(seed, Stream::Action);
    for s in 0..48 {
        let (x, y) = CliffWalk::decode(s);
        if CliffWalk::is_cliff(x, y) {
            continue;
        }
        let o = GridObservation::Index(s);
        let qv = q.q_values(&o)?;
        let b = beta_probs(&beta, &o)?;
        let mut row = vec![x.to_string(), y.to_string()];
        row.push(act_greedy(&qv, &mut tie).to_string());
        row.push(act_masked_greedy(&qv, &b, 0.05, &mut tie).to_string());
        for &p in &policies {
            row.push(act(p, &qv, &b, 0.05, None, &mut tie).action.to_string());
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn toy_config(output_dir: PathBuf, total_steps: usize, seeds: usize) -> ExperimentConfig {
    ExperimentConfig {
        output_dir,
        env: EnvConfig::cliffwalk(),
        agent: TrainConfig { total_steps, eval_period: (total_steps / 20).max(1), ..Default::default() },
        sweep: SweepConfig {
            agents: vec![AgentKind::BetaDqn, AgentKind::Dqn],
            seeds: (0..seeds as u64).collect(),
            workers: None,
            jsonl: false,
        },
    }
}

pub fn run_toy(output_dir: &Path, total_steps: usize, seeds: usize, workers: Option<usize>) -> Result<SweepOutcome> {
    std::fs::create_dir_all(output_dir)?;
    let (header, rows) = policy_actions(0)?;
    let mut w = csv::Writer::from_path(output_dir.join(POLICY_ACTIONS_FILE))?;
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    let mut cfg = toy_config(output_dir.to_path_buf(), total_steps, seeds);
    cfg.sweep.workers = workers;
    run_sweep(&cfg)
}
