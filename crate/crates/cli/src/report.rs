//! Aggregation of a finished run directory into figure-ready CSV files.
//!
//! Writes into `<run_dir>/report/`:
//! - `aggregate.csv`: mean and standard error across seeds per checkpoint,
//! - `summary.csv`: the same statistics at the final checkpoint,
//! - `<run>_selection.csv`: windowed share of coverage arms, correction arms
//!   with α > 0, and the pure exploitation arm `cor(0)`,
//! - `<run>_heatmap.csv` and `<agent>_heatmap_mean.csv`: final state-visit
//!   counts as `height × width` matrices.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use betadqn_core::policy::PolicySpec;
use serde::{Deserialize, Serialize};

use crate::output::{list_runs, read_final_visits, read_metrics, read_policies, CsvRow, RunFile, POLICIES_FILE};

pub const REPORT_DIR: &str = "report";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStat {
    pub agent: String,
    pub step: usize,
    pub seeds: usize,
    pub return_mean: f64,
    pub return_stderr: f64,
    pub success_mean: f64,
    pub success_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateReport {
    pub checkpoints: Vec<CheckpointStat>,
    /// Last checkpoint of each agent.
    pub finals: Vec<CheckpointStat>,
}

impl AggregateReport {
    pub fn final_for(&self, agent: &str) -> Option<&CheckpointStat> {
        self.finals.iter().find(|s| s.agent == agent)
    }
}

/// Sample mean and standard error `s / √n`; the error is zero for one value.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// (step, eval return, eval success).
pub type EvalTriple = (usize, f64, f64);

/// Every checkpoint in a run.
pub fn eval_points(rows: &[CsvRow]) -> Vec<EvalTriple> {
    rows.iter().filter_map(|r| Some((r.eval_step?, r.eval_return?, r.eval_success?))).collect()
}

/// Per-agent, per-checkpoint statistics. Every seed of an agent must report
/// the same checkpoints.
pub fn aggregate(runs: &[(RunFile, Vec<CsvRow>)]) -> Result<AggregateReport> {
    let mut by_agent: BTreeMap<&str, Vec<(u64, Vec<EvalTriple>)>> = BTreeMap::new();
    for (file, rows) in runs {
        by_agent.entry(file.agent.as_str()).or_default().push((file.seed, eval_points(rows)));
    }
    let mut report = AggregateReport::default();
    for (agent, seeds) in by_agent {
        let steps: Vec<usize> = seeds[0].1.iter().map(|p| p.0).collect();
        if steps.is_empty() {
            bail!("{agent} seed {} has no checkpoints", seeds[0].0);
        }
        for (seed, points) in &seeds {
            if points.iter().map(|p| p.0).ne(steps.iter().copied()) {
                bail!("{agent} seed {seed} checkpoints do not match seed {}", seeds[0].0);
            }
        }
        for (i, &step) in steps.iter().enumerate() {
            let returns: Vec<f64> = seeds.iter().map(|(_, p)| p[i].1).collect();
            let successes: Vec<f64> = seeds.iter().map(|(_, p)| p[i].2).collect();
            let (return_mean, return_stderr) = mean_stderr(&returns);
            let (success_mean, success_stderr) = mean_stderr(&successes);
            report.checkpoints.push(CheckpointStat {
                agent: agent.to_string(),
                step,
                seeds: seeds.len(),
                return_mean,
                return_stderr,
                success_mean,
                success_stderr,
            });
        }
        report.finals.push(report.checkpoints.last().expect("at least one checkpoint").clone());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPoint {
    pub step: usize,
    pub episode: usize,
    pub cov: f64,
    pub cor: f64,
    pub cor0: f64,
}

/// Window shares of the three policy groups after each episode.
pub fn selection_proportions(rows: &[CsvRow], policies: &[PolicySpec]) -> Result<Vec<SelectionPoint>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let counts = r.arm_counts()?;
        if counts.is_empty() {
            continue;
        }
        if counts.len() != policies.len() {
            bail!("episode {} has {} arm counts for {} policies", r.episode, counts.len(), policies.len());
        }
        let total: usize = counts.iter().sum();
        let (mut cov, mut cor, mut cor0) = (0usize, 0usize, 0usize);
        for (p, &c) in policies.iter().zip(&counts) {
            match *p {
                PolicySpec::Cov(_) => cov += c,
                PolicySpec::Cor(0.0) => cor0 += c,
                PolicySpec::Cor(_) => cor += c,
            }
        }
        let t = total.max(1) as f64;
        out.push(SelectionPoint {
            step: r.step,
            episode: r.episode,
            cov: cov as f64 / t,
            cor: cor as f64 / t,
            cor0: cor0 as f64 / t,
        });
    }
    Ok(out)
}

fn write_matrix(path: &Path, grid: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in grid {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every run in `dir`, writes the report files and returns the
/// aggregate statistics.
pub fn report(dir: &Path) -> Result<AggregateReport> {
    let files = list_runs(dir)?;
    if files.is_empty() {
        bail!("no per-run CSV files in {}", dir.display());
    }
    let mut runs = Vec::with_capacity(files.len());
    for f in files {
        let rows = read_metrics(&f.path)?;
        runs.push((f, rows));
    }
    let agg = aggregate(&runs)?;
    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out)?;
    write_rows(&out.join("aggregate.csv"), &agg.checkpoints)?;
    write_rows(&out.join("summary.csv"), &agg.finals)?;

    let policies_path = dir.join(POLICIES_FILE);
    let policies = if policies_path.exists() { Some(read_policies(&policies_path)?) } else { None };
    let mut heat_sums: BTreeMap<String, (Vec<Vec<f64>>, usize)> = BTreeMap::new();
    for (f, rows) in &runs {
        let stem = format!("{}_seed{}", f.agent, f.seed);
        if let Some(policies) = &policies {
            let sel = selection_proportions(rows, policies)?;
            if !sel.is_empty() {
                write_rows(&out.join(format!("{stem}_selection.csv")), &sel)?;
            }
        }
        let visits = f.visits_path();
        if visits.exists() {
            let grid: Vec<Vec<f64>> =
                read_final_visits(&visits)?.into_iter().map(|r| r.into_iter().map(|c| c as f64).collect()).collect();
            write_matrix(&out.join(format!("{stem}_heatmap.csv")), &grid)?;
            let entry =
                heat_sums.entry(f.agent.clone()).or_insert_with(|| (vec![vec![0.0; grid[0].len()]; grid.len()], 0));
            for (acc, row) in entry.0.iter_mut().zip(&grid) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            entry.1 += 1;
        }
    }
    for (agent, (mut sum, n)) in heat_sums {
        for v in sum.iter_mut().flatten() {
            *v /= n as f64;
        }
        write_matrix(&out.join(format!("{agent}_heatmap_mean.csv")), &sum)?;
    }
    Ok(agg)
}

pub fn report_dir(run_dir: &Path) -> PathBuf {
    run_dir.join(REPORT_DIR)
}
