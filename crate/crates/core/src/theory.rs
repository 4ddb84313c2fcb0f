//! Executable checks for the in-sample Bellman operator and for the
//! visitation/regret behavior of pure coverage exploration.
//!
//! The in-sample operator restricts the bootstrap max to supported actions:
//!
//! ```text
//! (B̂Q)(s,a) = Σ_{s'} P(s'|s,a) [ R(s,a) + γ max_{a' : M(s',a')} Q(s',a') ]
//! ```
//!
//! It stays a γ-contraction in the sup norm for any support mask `M`, and
//! coincides with the ordinary optimality operator when `M` is all ones.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};
use thiserror::Error;

use crate::parallel::par_map;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("value iteration did not converge within {iters} iterations (last change {last_change:e})")]
    NoConvergence { iters: usize, last_change: f64 },
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),
    #[error("invalid bandit: {0}")]
    InvalidBandit(String),
}

/// Finite MDP with a per-(s, a) support mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub states: usize,
    pub actions: usize,
    /// `P[s][a][s']`, flattened.
    pub transitions: Vec<f64>,
    /// `R[s][a]`, flattened.
    pub rewards: Vec<f64>,
    pub gamma: f64,
    /// `M[s][a]`; true where `β(a|s) > ε`.
    pub support: Vec<bool>,
}

impl TabularMdp {
    pub fn new(
        states: usize,
        actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        gamma: f64,
        support: Vec<bool>,
    ) -> Result<Self, TheoryError> {
        if transitions.len() != states * actions * states
            || rewards.len() != states * actions
            || support.len() != states * actions
        {
            return Err(TheoryError::InvalidMdp("shape mismatch".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(TheoryError::InvalidMdp(format!("gamma {gamma} outside [0, 1)")));
        }
        for (row, p) in transitions.chunks(states).enumerate() {
            let sum: f64 = p.iter().sum();
            if p.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(TheoryError::InvalidMdp(format!("row {row} is not a distribution")));
            }
        }
        Ok(Self { states, actions, transitions, rewards, gamma, support })
    }

    /// Same MDP with every action supported.
    pub fn with_full_support(&self) -> Self {
        Self { support: vec![true; self.support.len()], ..self.clone() }
    }

    pub fn p(&self, s: usize, a: usize) -> &[f64] {
        let o = (s * self.actions + a) * self.states;
        &self.transitions[o..o + self.states]
    }

    pub fn reward_sup_norm(&self) -> f64 {
        sup_norm(&self.rewards)
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Random instance: Dirichlet(1, …, 1) rows (normalized unit exponentials), rewards uniform in [-1, 1],
/// Bernoulli(0.7) support redrawn until every state keeps an action.
pub fn random_mdp<R: Rng + ?Sized>(states: usize, actions: usize, gamma: f64, rng: &mut R) -> TabularMdp {
    let mut transitions = Vec::with_capacity(states * actions * states);
    for _ in 0..states * actions {
        let row: Vec<f64> = (0..states).map(|_| Exp1.sample(rng)).collect();
        let sum: f64 = row.iter().sum();
        transitions.extend(row.iter().map(|p| p / sum));
    }
    let rewards = (0..states * actions).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let support = loop {
        let m: Vec<bool> = (0..states * actions).map(|_| rng.random_bool(0.7)).collect();
        if m.chunks(actions).all(|row| row.iter().any(|&x| x)) {
            break m;
        }
    };
    TabularMdp::new(states, actions, transitions, rewards, gamma, support).expect("generated MDP is valid")
}

fn supported_max(mdp: &TabularMdp, q: &[f64], s: usize) -> f64 {
    let row = &q[s * mdp.actions..(s + 1) * mdp.actions];
    let mask = &mdp.support[s * mdp.actions..(s + 1) * mdp.actions];
    let masked = row.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).fold(f64::NEG_INFINITY, f64::max);
    if masked == f64::NEG_INFINITY {
        row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        masked
    }
}

/// One application of the in-sample optimality operator.
pub fn masked_bellman(mdp: &TabularMdp, q: &[f64]) -> Vec<f64> {
    assert_eq!(q.len(), mdp.states * mdp.actions, "Q shape mismatch");
    let v: Vec<f64> = (0..mdp.states).map(|s| supported_max(mdp, q, s)).collect();
    let mut out = Vec::with_capacity(q.len());
    for s in 0..mdp.states {
        for a in 0..mdp.actions {
            let expected: f64 = mdp.p(s, a).iter().zip(&v).map(|(p, v)| p * v).sum();
            out.push(mdp.rewards[s * mdp.actions + a] + mdp.gamma * expected);
        }
    }
    out
}

/// Ordinary optimality operator, max over all actions.
pub fn bellman(mdp: &TabularMdp, q: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = q.chunks(mdp.actions).map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let mut out = Vec::with_capacity(q.len());
    for s in 0..mdp.states {
        for a in 0..mdp.actions {
            let expected: f64 = mdp.p(s, a).iter().zip(&v).map(|(p, v)| p * v).sum();
            out.push(mdp.rewards[s * mdp.actions + a] + mdp.gamma * expected);
        }
    }
    out
}

fn iterate(
    op: impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, usize), TheoryError> {
    assert!(tol > 0.0);
    let mut q = vec![0.0; n];
    let mut change = f64::INFINITY;
    for it in 1..=max_iters {
        let next = op(&q);
        change = sup_distance(&next, &q);
        q = next;
        if change < tol {
            return Ok((q, it));
        }
    }
    Err(TheoryError::NoConvergence { iters: max_iters, last_change: change })
}

/// Iterates the in-sample operator from zero until the sup-norm change
/// drops below `tol`.
pub fn masked_value_iteration(mdp: &TabularMdp, tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize), TheoryError> {
    iterate(|q| masked_bellman(mdp, q), mdp.states * mdp.actions, tol, max_iters)
}

/// Standard value iteration, independent of the mask.
pub fn value_iteration(mdp: &TabularMdp, tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize), TheoryError> {
    iterate(|q| bellman(mdp, q), mdp.states * mdp.actions, tol, max_iters)
}

/// Upper bound on iterations from zero: `log(tol (1-γ) / ‖R‖∞) / log γ + 2`.
pub fn iteration_bound(mdp: &TabularMdp, tol: f64) -> f64 {
    let r = mdp.reward_sup_norm().max(f64::MIN_POSITIVE);
    (tol * (1.0 - mdp.gamma) / r).ln() / mdp.gamma.ln() + 2.0
}

/// Largest observed `‖B̂Q₁ − B̂Q₂‖∞ / ‖Q₁ − Q₂‖∞` over random pairs with
/// entries uniform in [-10, 10]. Identical pairs are skipped.
pub fn contraction_check<R: Rng + ?Sized>(mdp: &TabularMdp, trials: usize, rng: &mut R) -> f64 {
    let n = mdp.states * mdp.actions;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let q1: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let q2: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let denom = sup_distance(&q1, &q2);
        if denom == 0.0 {
            continue;
        }
        let num = sup_distance(&masked_bellman(mdp, &q1), &masked_bellman(mdp, &q2));
        worst = worst.max(num / denom);
    }
    worst
}

// ---------------------------------------------------------------------------
// Coverage exploration on bandits and trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardNoise {
    None,
    Gaussian { sigma: f64 },
}

impl RewardNoise {
    fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            RewardNoise::None => mean,
            RewardNoise::Gaussian { sigma } => Normal::new(mean, sigma).expect("finite sigma").sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub means: Vec<f64>,
    pub noise: RewardNoise,
    pub delta: f64,
    pub horizon: usize,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, noise: RewardNoise, delta: f64, horizon: usize) -> Result<Self, TheoryError> {
        if means.len() < 2 {
            return Err(TheoryError::InvalidBandit("need at least two arms".into()));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(TheoryError::InvalidBandit(format!("delta {delta} outside [0, 1]")));
        }
        Ok(Self { means, noise, delta, horizon })
    }

    pub fn gaps(&self) -> Vec<f64> {
        let best = self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.means.iter().map(|m| best - m).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditRun {
    /// Pulls per arm, excluding the initial pseudo-count.
    pub pulls: Vec<u64>,
    /// Cumulative pseudo-regret `Σ_i N_i(t) Δ_i` after each step.
    pub regret: Vec<f64>,
}

/// Coverage-policy choice over pseudo-counts: uniform over arms whose
/// empirical frequency is at most δ, else the best sample mean.
fn coverage_choice<R: Rng + ?Sized>(counts: &[u64], sums: &[f64], delta: f64, rng: &mut R) -> usize {
    let total: u64 = counts.iter().sum();
    let rare: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] as f64 / total as f64 <= delta).collect();
    if !rare.is_empty() {
        return rare[rng.random_range(0..rare.len())];
    }
    let means: Vec<f64> = counts.iter().zip(sums).map(|(&n, &s)| s / n as f64).collect();
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best: Vec<usize> = (0..means.len()).filter(|&i| means[i] == top).collect();
    best[rng.random_range(0..best.len())]
}

/// Runs the coverage policy on a bandit. Counts start at one so β starts
/// uniform, and β is recomputed from counts after every pull.
pub fn run_cov_bandit<R: Rng + ?Sized>(b: &BanditInstance, rng: &mut R) -> BanditRun {
    let k = b.means.len();
    let gaps = b.gaps();
    let mut counts = vec![1u64; k];
    let mut sums = vec![0.0; k];
    let mut regret = Vec::with_capacity(b.horizon);
    let mut acc = 0.0;
    for _ in 0..b.horizon {
        let arm = coverage_choice(&counts, &sums, b.delta, rng);
        let x = b.noise.sample(b.means[arm], rng);
        counts[arm] += 1;
        sums[arm] += x;
        acc += gaps[arm];
        regret.push(acc);
    }
    BanditRun { pulls: counts.iter().map(|c| c - 1).collect(), regret }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditSummary {
    pub mean_pulls: Vec<f64>,
    pub mean_regret: Vec<f64>,
    pub seeds: usize,
}

/// Averages [`run_cov_bandit`] over `seeds`, one independent stream each.
pub fn cov_bandit_monte_carlo(b: &BanditInstance, seeds: &[u64]) -> BanditSummary {
    let runs = par_map(seeds.to_vec(), |seed| {
        let mut rng = crate::rng::stream(seed, crate::rng::Stream::Oracle);
        run_cov_bandit(b, &mut rng)
    });
    let n = runs.len() as f64;
    let mut mean_pulls = vec![0.0; b.means.len()];
    let mut mean_regret = vec![0.0; b.horizon];
    for run in &runs {
        for (m, &p) in mean_pulls.iter_mut().zip(&run.pulls) {
            *m += p as f64 / n;
        }
        for (m, &r) in mean_regret.iter_mut().zip(&run.regret) {
            *m += r / n;
        }
    }
    BanditSummary { mean_pulls, mean_regret, seeds: runs.len() }
}

/// Depth-`depth` tree with `branching` actions per node; an episode walks
/// from the root to a leaf and earns that leaf's reward.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    pub depth: usize,
    pub branching: usize,
    /// Mean reward per leaf, indexed by the action sequence in base `branching`.
    pub leaf_means: Vec<f64>,
    pub noise: RewardNoise,
}

impl TreeInstance {
    pub fn new(depth: usize, branching: usize, leaf_means: Vec<f64>, noise: RewardNoise) -> Result<Self, TheoryError> {
        if depth == 0 || branching < 2 {
            return Err(TheoryError::InvalidMdp("tree needs depth ≥ 1 and branching ≥ 2".into()));
        }
        let leaves = branching.checked_pow(depth as u32).filter(|&n| n <= 10_000);
        match leaves {
            Some(n) if n == leaf_means.len() => Ok(Self { depth, branching, leaf_means, noise }),
            Some(n) => Err(TheoryError::InvalidMdp(format!("expected {n} leaf means, got {}", leaf_means.len()))),
            None => Err(TheoryError::InvalidMdp("tree too large for exact counting".into())),
        }
    }

    /// Number of decision nodes, `Σ_{l<H} k^l`.
    pub fn internal_nodes(&self) -> usize {
        (0..self.depth).map(|l| self.branching.pow(l as u32)).sum()
    }
}

/// Per-(node, action) visit counts, nodes in breadth-first order.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeVisits {
    pub branching: usize,
    pub counts: Vec<u64>,
    /// Level of each decision node.
    pub levels: Vec<usize>,
}

/// Runs `episodes` of the coverage policy on the tree. Each node keeps its
/// own action pseudo-counts (starting at one) and Monte-Carlo estimates of
/// the return that follows each action.
pub fn run_cov_tree<R: Rng + ?Sized>(tree: &TreeInstance, delta: f64, episodes: usize, rng: &mut R) -> TreeVisits {
    let k = tree.branching;
    let nodes = tree.internal_nodes();
    let mut counts = vec![1u64; nodes * k];
    let mut sums = vec![0.0; nodes * k];
    let mut levels = Vec::with_capacity(nodes);
    for l in 0..tree.depth {
        levels.extend(std::iter::repeat_n(l, k.pow(l as u32)));
    }
    let mut path = Vec::with_capacity(tree.depth);
    for _ in 0..episodes {
        path.clear();
        let mut node = 0usize;
        let mut leaf = 0usize;
        for _ in 0..tree.depth {
            let o = node * k;
            let a = coverage_choice(&counts[o..o + k], &sums[o..o + k], delta, rng);
            path.push(o + a);
            leaf = leaf * k + a;
            node = node * k + 1 + a;
        }
        let g = tree.noise.sample(tree.leaf_means[leaf], rng);
        for &slot in &path {
            counts[slot] += 1;
            sums[slot] += g;
        }
    }
    TreeVisits { branching: k, counts: counts.iter().map(|c| c - 1).collect(), levels }
}

/// Ordinary least squares `y ≈ slope·x + intercept` with its R².
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}
