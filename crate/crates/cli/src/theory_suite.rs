//! Operator and visitation checks at full scale, reported as one
//! pass/fail line per check with the measured value.

use std::io::Write;

use betadqn_core::parallel::par_map;
use betadqn_core::rng::{stream, Stream};
use betadqn_core::theory::{
    bellman, contraction_check, cov_bandit_monte_carlo, iteration_bound, linear_fit, masked_bellman,
    masked_value_iteration, random_mdp, run_cov_tree, sup_distance, value_iteration, BanditInstance, RewardNoise,
    TabularMdp, TreeInstance,
};
use rand::Rng;
use serde::Serialize;

pub const GAMMAS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    /// Bound the measured value is compared against.
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, passed: measured <= threshold }
    }

    fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, passed: measured >= threshold }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub mdps: usize,
    pub pairs: usize,
    pub bandit_horizon: usize,
    pub bandit_seeds: usize,
    pub tree_episodes: usize,
    pub tree_seeds: usize,
    pub delta: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mdps: 50,
            pairs: 1000,
            bandit_horizon: 100_000,
            bandit_seeds: 100,
            tree_episodes: 100_000,
            tree_seeds: 20,
            delta: 0.1,
        }
    }
}

fn instance(seed: u64, index: usize, gamma: f64) -> TabularMdp {
    let mut rng = stream(seed.wrapping_add(index as u64), Stream::Oracle);
    let states = rng.random_range(2..=12);
    let actions = rng.random_range(2..=5);
    random_mdp(states, actions, gamma, &mut rng)
}

/// Largest contraction ratio over `mdps × pairs` random draws.
pub fn contraction(cfg: &SuiteConfig, gamma: f64) -> CheckResult {
    let ratios = par_map((0..cfg.mdps).collect(), |i| {
        let mdp = instance(cfg.seed, i, gamma);
        let mut rng = stream(cfg.seed.wrapping_add(1_000_000 + i as u64), Stream::Oracle);
        contraction_check(&mdp, cfg.pairs, &mut rng)
    });
    let worst = ratios.into_iter().fold(0.0, f64::max);
    CheckResult::at_most(format!("contraction_ratio_gamma_{gamma}"), worst, gamma + 1e-12)
}

/// Masked value iteration residual, and the distance between the masked and
/// standard fixed points under full support.
pub fn fixed_point(cfg: &SuiteConfig, gamma: f64) -> Vec<CheckResult> {
    const TOL: f64 = 1e-10;
    let per_mdp = par_map((0..cfg.mdps).collect(), |i| {
        let mdp = instance(cfg.seed, i, gamma);
        let max_iters = iteration_bound(&mdp, TOL).ceil() as usize + 10;
        let residual = match masked_value_iteration(&mdp, TOL, max_iters) {
            Ok((q, _)) => sup_distance(&masked_bellman(&mdp, &q), &q),
            Err(_) => f64::INFINITY,
        };
        let full = mdp.with_full_support();
        let gap = match (masked_value_iteration(&full, TOL, max_iters), value_iteration(&full, TOL, max_iters)) {
            (Ok((a, _)), Ok((b, _))) => {
                // Both must also be fixed points of the standard operator.
                sup_distance(&a, &b).max(sup_distance(&bellman(&full, &b), &b))
            }
            _ => f64::INFINITY,
        };
        (residual, gap)
    });
    let residual = per_mdp.iter().map(|p| p.0).fold(0.0, f64::max);
    let gap = per_mdp.iter().map(|p| p.1).fold(0.0, f64::max);
    vec![
        CheckResult::at_most(format!("fixed_point_residual_gamma_{gamma}"), residual, 1e-8),
        CheckResult::at_most(format!("full_support_gap_gamma_{gamma}"), gap, 1e-7),
    ]
}

fn seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base.wrapping_add(i)).collect()
}

/// Pull counts and regret shape of pure coverage exploration on a 4-arm
/// Gaussian bandit.
pub fn bandit(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let b = BanditInstance::new(
        vec![0.9, 0.6, 0.4, 0.1],
        RewardNoise::Gaussian { sigma: 1.0 },
        cfg.delta,
        cfg.bandit_horizon,
    )
    .expect("valid bandit");
    let summary = cov_bandit_monte_carlo(&b, &seeds(cfg.seed.wrapping_add(2_000_000), cfg.bandit_seeds));
    let min_pulls = summary.mean_pulls.iter().copied().fold(f64::INFINITY, f64::min);
    let half = cfg.bandit_horizon / 2;
    let x: Vec<f64> = (half..cfg.bandit_horizon).map(|t| (t + 1) as f64).collect();
    let (slope, _, r2) = linear_fit(&x, &summary.mean_regret[half..]);
    vec![
        CheckResult::at_least("bandit_min_mean_pulls", min_pulls, 0.9 * cfg.delta * cfg.bandit_horizon as f64),
        CheckResult::at_least("bandit_regret_slope", slope, f64::MIN_POSITIVE),
        CheckResult::at_least("bandit_regret_r2", r2, 0.99),
    ]
}

/// With δ ≥ 1/k the exploit branch never fires, so every arm is pulled
/// about n/k times. Reports the largest deviation in standard deviations.
pub fn bandit_uniform(cfg: &SuiteConfig) -> CheckResult {
    let k = 4;
    let n = 10_000;
    let b = BanditInstance::new(vec![0.9, 0.6, 0.4, 0.1], RewardNoise::None, 1.0 / k as f64, n).expect("valid bandit");
    let mut rng = stream(cfg.seed.wrapping_add(3_000_000), Stream::Oracle);
    let run = betadqn_core::theory::run_cov_bandit(&b, &mut rng);
    let p = 1.0 / k as f64;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    let worst = run.pulls.iter().map(|&c| (c as f64 - n as f64 * p).abs() / sd).fold(0.0, f64::max);
    CheckResult::at_most("bandit_uniform_max_sigma", worst, 3.0)
}

/// Smallest mean (node, action) visit count on a depth-2 binary tree.
pub fn tree(cfg: &SuiteConfig) -> CheckResult {
    let t =
        TreeInstance::new(2, 2, vec![0.1, 0.3, 0.5, 0.9], RewardNoise::Gaussian { sigma: 0.5 }).expect("valid tree");
    let runs = par_map(seeds(cfg.seed.wrapping_add(4_000_000), cfg.tree_seeds), |s| {
        let mut rng = stream(s, Stream::Oracle);
        run_cov_tree(&t, cfg.delta, cfg.tree_episodes, &mut rng)
    });
    let slots = runs[0].counts.len();
    let min_mean = (0..slots)
        .map(|i| runs.iter().map(|r| r.counts[i] as f64).sum::<f64>() / runs.len() as f64)
        .fold(f64::INFINITY, f64::min);
    CheckResult::at_least("tree_min_mean_visits", min_mean, 0.9 * cfg.delta.powi(2) * cfg.tree_episodes as f64)
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for g in GAMMAS {
        out.push(contraction(cfg, g));
    }
    for g in GAMMAS {
        out.extend(fixed_point(cfg, g));
    }
    out.extend(bandit(cfg));
    out.push(bandit_uniform(cfg));
    out.push(tree(cfg));
    out
}

pub fn write_csv<W: Write>(w: W, results: &[CheckResult]) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in results {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}
