//! Sweep execution: every (agent, seed) pair is an isolated training run
//! whose files are written as soon as it finishes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use betadqn_core::agent::{train, AgentKind, MetricsStream};

use crate::config::{run_stem, ExperimentConfig, RESOLVED_CONFIG};
use crate::output::{write_jsonl, write_metrics, write_policies, write_visits, POLICIES_FILE, VISITS_SUFFIX};
use crate::report::{report, AggregateReport};

#[derive(Debug)]
pub struct RunFailure {
    pub agent: AgentKind,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<RunFailure>,
    pub report: Option<AggregateReport>,
}

impl SweepOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn save_run(dir: &Path, stream: &MetricsStream, jsonl: bool) -> Result<PathBuf> {
    let stem = run_stem(stream.kind, stream.seed);
    let path = dir.join(format!("{stem}.csv"));
    write_visits(&dir.join(format!("{stem}{VISITS_SUFFIX}")), stream)?;
    if jsonl {
        write_jsonl(&dir.join(format!("{stem}.jsonl")), &stream.rows)?;
    }
    // Metrics last: its presence marks the run as complete.
    write_metrics(&path, &stream.rows)?;
    Ok(path)
}

fn run_one(cfg: &ExperimentConfig, kind: AgentKind, seed: u64) -> Result<PathBuf> {
    let stream = train(&cfg.env, cfg.train_config(kind, seed))?;
    save_run(&cfg.output_dir, &stream, cfg.sweep.jsonl)
}

#[cfg(feature = "parallel")]
fn execute<F>(jobs: Vec<(AgentKind, u64)>, workers: usize, f: F) -> Vec<Result<PathBuf>>
where
    F: Fn((AgentKind, u64)) -> Result<PathBuf> + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| jobs.into_par_iter().map(&f).collect()),
        Err(_) => jobs.into_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn execute<F>(jobs: Vec<(AgentKind, u64)>, _workers: usize, f: F) -> Vec<Result<PathBuf>>
where
    F: Fn((AgentKind, u64)) -> Result<PathBuf> + Sync + Send,
{
    jobs.into_iter().map(f).collect()
}

/// Runs the whole sweep. A failing run is recorded and the others continue;
/// the aggregate report covers whatever completed.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join(RESOLVED_CONFIG), cfg.to_toml())?;
    if cfg.sweep.agents.contains(&AgentKind::BetaDqn) {
        write_policies(&dir.join(POLICIES_FILE), &cfg.agent.policy_set())?;
    }

    let jobs: Vec<(AgentKind, u64)> =
        cfg.sweep.agents.iter().flat_map(|&a| cfg.sweep.seeds.iter().map(move |&s| (a, s))).collect();
    let results = execute(jobs.clone(), cfg.workers(), |(kind, seed)| run_one(cfg, kind, seed));

    let mut outcome = SweepOutcome::default();
    for ((agent, seed), res) in jobs.into_iter().zip(results) {
        match res {
            Ok(path) => outcome.written.push(path),
            Err(e) => outcome.failures.push(RunFailure { agent, seed, error: format!("{e:#}") }),
        }
    }
    if !outcome.written.is_empty() {
        outcome.report = Some(report(dir)?);
    }
    Ok(outcome)
}
