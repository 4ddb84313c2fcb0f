//! Action selection built from Q and β.
//!
//! Three basic rules: coverage exploration (uniform over rarely taken
//! actions), optimistic greedy over Q, and greedy over β-supported actions.
//! The policy set interpolates between them: `Cov(δ)` mixes coverage with
//! masked greedy, `Cor(α)` blends Q with the β-suppressed Q̂.
//!
//! All maximizations break ties uniformly at random with the caller's stream.
//! Whether an action counts as exploratory is decided against the masked
//! greedy action drawn from a clone of that same stream, so the comparison
//! is deterministic given the stream state.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::ActionDistribution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("no action has β ≤ {0}")]
    EmptyCoverageSet(f64),
    #[error("policy parameter {0} outside [0, 1]")]
    ParamOutOfRange(f64),
    #[error("policy set needs at least one δ and one α")]
    EmptyList,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Coverage policy with threshold δ.
    Cov(f64),
    /// Correction policy with blend weight α.
    Cor(f64),
}

impl PolicySpec {
    pub fn param(&self) -> f64 {
        match *self {
            PolicySpec::Cov(p) | PolicySpec::Cor(p) => p,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::Cov(d) => format!("cov({d})"),
            PolicySpec::Cor(a) => format!("cor({a})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionChoice {
    pub action: usize,
    /// Differs from the masked greedy action at this state.
    pub was_exploratory: bool,
}

pub fn pick_uniform<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> usize {
    debug_assert!(!candidates.is_empty());
    candidates[rng.random_range(0..candidates.len())]
}

/// Indices attaining the maximum of `values` among `allowed`.
fn maximizers(values: &[f64], allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for (a, &v) in values.iter().enumerate() {
        if !allowed(a) {
            continue;
        }
        if v > best {
            best = v;
            out.clear();
            out.push(a);
        } else if v == best {
            out.push(a);
        }
    }
    out
}

/// Uniform over `{a : β(a) ≤ δ}`.
pub fn act_coverage<R: Rng + ?Sized>(beta: &ActionDistribution, delta: f64, rng: &mut R) -> Result<usize, PolicyError> {
    let rare: Vec<usize> = (0..beta.len()).filter(|&a| beta.probs()[a] <= delta).collect();
    if rare.is_empty() {
        return Err(PolicyError::EmptyCoverageSet(delta));
    }
    Ok(pick_uniform(&rare, rng))
}

pub fn act_greedy<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> usize {
    pick_uniform(&maximizers(q, |_| true), rng)
}

/// Greedy over `{a : β(a) > ε}`; unrestricted greedy when that set is empty.
pub fn act_masked_greedy<R: Rng + ?Sized>(q: &[f64], beta: &ActionDistribution, epsilon: f64, rng: &mut R) -> usize {
    let best = maximizers(q, |a| beta.supports(a, epsilon));
    if best.is_empty() {
        act_greedy(q, rng)
    } else {
        pick_uniform(&best, rng)
    }
}

/// Q with unsupported actions lowered to `min_a Q(a)`.
pub fn q_hat(q: &[f64], beta: &ActionDistribution, epsilon: f64) -> Vec<f64> {
    let floor = q.iter().copied().fold(f64::INFINITY, f64::min);
    q.iter().enumerate().map(|(a, &v)| if beta.supports(a, epsilon) { v } else { floor }).collect()
}

fn reference_action<R: Rng + Clone>(q: &[f64], beta: &ActionDistribution, epsilon: f64, rng: &R) -> usize {
    act_masked_greedy(q, beta, epsilon, &mut rng.clone())
}

/// Masked greedy when every action has `β > δ`, otherwise uniform over the
/// rarely taken ones.
pub fn act_cov<R: Rng + Clone>(
    delta: f64,
    q: &[f64],
    beta: &ActionDistribution,
    epsilon: f64,
    rng: &mut R,
) -> ActionChoice {
    act_cov_with_visits(delta, q, beta, epsilon, None, rng)
}

/// [`act_cov`] with an optional per-episode visit count for the current
/// state's actions. When given, the coverage branch only draws among the
/// rare actions tried least often in this episode.
pub fn act_cov_with_visits<R: Rng + Clone>(
    delta: f64,
    q: &[f64],
    beta: &ActionDistribution,
    epsilon: f64,
    episode_visits: Option<&[u32]>,
    rng: &mut R,
) -> ActionChoice {
    let reference = reference_action(q, beta, epsilon, rng);
    let p = beta.probs();
    let action = if p.iter().all(|&b| b > delta) {
        act_masked_greedy(q, beta, epsilon, rng)
    } else {
        let mut rare: Vec<usize> = (0..p.len()).filter(|&a| p[a] <= delta).collect();
        if let Some(visits) = episode_visits {
            let least = rare.iter().map(|&a| visits[a]).min().unwrap_or(0);
            rare.retain(|&a| visits[a] == least);
        }
        pick_uniform(&rare, rng)
    };
    ActionChoice { action, was_exploratory: action != reference }
}

/// Greedy over `α Q + (1 − α) Q̂`.
///
/// Ties are broken uniformly, except at α = 0 where they prefer β-supported
/// actions and then larger raw Q, so the choice coincides with the masked
/// greedy action even when Q̂ is flat.
pub fn act_cor<R: Rng + Clone>(
    alpha: f64,
    q: &[f64],
    beta: &ActionDistribution,
    epsilon: f64,
    rng: &mut R,
) -> ActionChoice {
    let reference = reference_action(q, beta, epsilon, rng);
    let suppressed = q_hat(q, beta, epsilon);
    let blend: Vec<f64> = q.iter().zip(&suppressed).map(|(&a, &b)| alpha * a + (1.0 - alpha) * b).collect();
    let mut best = maximizers(&blend, |_| true);
    if alpha == 0.0 && best.len() > 1 {
        let supported: Vec<usize> = best.iter().copied().filter(|&a| beta.supports(a, epsilon)).collect();
        if !supported.is_empty() {
            best = supported;
        }
        let top = best.iter().map(|&a| q[a]).fold(f64::NEG_INFINITY, f64::max);
        best.retain(|&a| q[a] == top);
    }
    let action = pick_uniform(&best, rng);
    ActionChoice { action, was_exploratory: action != reference }
}

pub fn act<R: Rng + Clone>(
    spec: PolicySpec,
    q: &[f64],
    beta: &ActionDistribution,
    epsilon: f64,
    episode_visits: Option<&[u32]>,
    rng: &mut R,
) -> ActionChoice {
    match spec {
        PolicySpec::Cov(delta) => act_cov_with_visits(delta, q, beta, epsilon, episode_visits, rng),
        PolicySpec::Cor(alpha) => act_cor(alpha, q, beta, epsilon, rng),
    }
}

/// Coverage policies first, then correction policies, in the given order.
pub fn build_policy_set(deltas: &[f64], alphas: &[f64]) -> Result<Vec<PolicySpec>, PolicyError> {
    if deltas.is_empty() || alphas.is_empty() {
        return Err(PolicyError::EmptyList);
    }
    if let Some(&bad) = deltas.iter().chain(alphas).find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(PolicyError::ParamOutOfRange(bad));
    }
    Ok(deltas.iter().map(|&d| PolicySpec::Cov(d)).chain(alphas.iter().map(|&a| PolicySpec::Cor(a))).collect())
}

pub const DEFAULT_DELTAS: [f64; 2] = [0.05, 0.1];

/// `0, 0.1, …, 1.0`.
pub fn default_alphas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn default_policy_set() -> Vec<PolicySpec> {
    build_policy_set(&DEFAULT_DELTAS, &default_alphas()).expect("default policy set is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(p: &[f64]) -> ActionDistribution {
        ActionDistribution::new(p.to_vec()).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn coverage_singleton_and_set() {
        assert_eq!(act_coverage(&dist(&[0.97, 0.03]), 0.05, &mut rng(0)).unwrap(), 1);
        let b = dist(&[0.5, 0.3, 0.2, 0.0]);
        let mut r = rng(1);
        let mut seen = [0usize; 4];
        for _ in 0..2000 {
            seen[act_coverage(&b, 0.25, &mut r).unwrap()] += 1;
        }
        assert_eq!(seen[0] + seen[1], 0);
        assert!(seen[2] > 800 && seen[3] > 800);
        assert_eq!(act_coverage(&dist(&[0.5, 0.5]), 0.1, &mut r), Err(PolicyError::EmptyCoverageSet(0.1)));
    }

    #[test]
    fn coverage_on_single_trajectory_tries_missing_actions() {
        let b = dist(&[0.0, 1.0, 0.0, 0.0]);
        let mut r = rng(2);
        for _ in 0..200 {
            assert_ne!(act_coverage(&b, 0.05, &mut r).unwrap(), 1);
        }
    }

    #[test]
    fn greedy_and_ties() {
        assert_eq!(act_greedy(&[1.0, 2.0, 0.5], &mut rng(0)), 1);
        let mut r = rng(3);
        let mut seen = [0usize; 4];
        for _ in 0..40_000 {
            seen[act_greedy(&[0.0; 4], &mut r)] += 1;
        }
        for n in seen {
            assert!((n as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn masked_greedy_examples() {
        assert_eq!(act_masked_greedy(&[9.9, 0.2], &dist(&[0.03, 0.97]), 0.05, &mut rng(0)), 1);
        let q = [0.3, -1.0, 2.0, 0.7];
        for s in 0..20 {
            assert_eq!(
                act_masked_greedy(&q, &ActionDistribution::uniform(4), 0.05, &mut rng(s)),
                act_greedy(&q, &mut rng(s))
            );
        }
    }

    #[test]
    fn q_hat_examples() {
        assert_eq!(q_hat(&[1.0, 2.0], &dist(&[0.98, 0.02]), 0.05), vec![1.0, 1.0]);
        assert_eq!(q_hat(&[1.0, 2.0], &dist(&[0.5, 0.5]), 0.05), vec![1.0, 2.0]);
        assert_eq!(q_hat(&[3.0, 2.0, 5.0], &dist(&[0.0, 1.0, 0.0]), 1.0), vec![2.0; 3]);
    }

    #[test]
    fn cov_examples() {
        // δ = 0 with strictly positive β is pure exploitation.
        let b = dist(&[0.2, 0.3, 0.5]);
        let q = [0.1, 0.9, 0.4];
        let c = act_cov(0.0, &q, &b, 0.05, &mut rng(0));
        assert_eq!(c, ActionChoice { action: 1, was_exploratory: false });

        let c = act_cov(0.05, &[1.0, 0.0], &dist(&[0.97, 0.03]), 0.05, &mut rng(0));
        assert_eq!(c, ActionChoice { action: 1, was_exploratory: true });

        let mut r = rng(5);
        let mut seen = [0usize; 4];
        for _ in 0..40_000 {
            seen[act_cov(0.25, &[5.0, 0.0, 0.0, 0.0], &ActionDistribution::uniform(4), 0.05, &mut r).action] += 1;
        }
        for n in seen {
            assert!((n as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn cov_visit_penalty_prefers_untried() {
        let b = dist(&[1.0, 0.0, 0.0, 0.0]);
        let visits = [0, 3, 0, 1];
        for s in 0..50 {
            let c = act_cov_with_visits(0.05, &[0.0; 4], &b, 0.05, Some(&visits), &mut rng(s));
            assert_eq!(c.action, 2);
        }
    }

    #[test]
    fn cor_examples() {
        let b = dist(&[0.98, 0.02]);
        let c = act_cor(0.5, &[1.0, 2.0], &b, 0.05, &mut rng(0));
        assert_eq!(c, ActionChoice { action: 1, was_exploratory: true });
        assert_eq!(act_cor(0.0, &[1.0, 2.0], &b, 0.05, &mut rng(0)).action, 0);
        assert_eq!(act_cor(1.0, &[1.0, 2.0], &b, 0.05, &mut rng(0)).action, 1);
    }

    #[test]
    fn cor_zero_matches_masked_greedy_on_min_ties() {
        // The only supported action is the argmin, so Q̂ is flat.
        let b = dist(&[0.9, 0.05, 0.05]);
        for s in 0..100 {
            let c = act_cor(0.0, &[0.2, 0.5, 0.7], &b, 0.05, &mut rng(s));
            assert_eq!(c, ActionChoice { action: 0, was_exploratory: false });
        }
        // Empty support: both fall back to the unrestricted argmax.
        let b = dist(&[0.5, 0.5]);
        for s in 0..100 {
            let c = act_cor(0.0, &[0.2, 0.5], &b, 0.6, &mut rng(s));
            assert_eq!(c.action, 1);
        }
    }

    #[test]
    fn policy_set_sizes() {
        let set = default_policy_set();
        assert_eq!(set.len(), 13);
        assert_eq!(set.iter().filter(|p| matches!(p, PolicySpec::Cov(_))).count(), 2);
        assert_eq!(set[2], PolicySpec::Cor(0.0));
        assert_eq!(set[12], PolicySpec::Cor(1.0));
        let eight = build_policy_set(&[0.05, 0.1], &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
        assert_eq!(eight.len(), 8);
        assert_eq!(build_policy_set(&[0.1], &[0.5]).unwrap().len(), 2);
        assert_eq!(build_policy_set(&[], &[0.5]), Err(PolicyError::EmptyList));
        assert_eq!(build_policy_set(&[1.5], &[0.5]), Err(PolicyError::ParamOutOfRange(1.5)));
    }
}
