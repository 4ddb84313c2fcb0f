use betadqn_core::agent::{epsilon_greedy, sample_duration, train, AgentKind, TrainConfig, Trainer};
use betadqn_core::approx::beta_probs;
use betadqn_core::env::{EnvConfig, GridObservation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(kind: AgentKind, seed: u64) -> TrainConfig {
    TrainConfig { kind, seed, total_steps: 5_000, eval_period: 1_000, eval_episodes: 3, ..Default::default() }
}

#[test]
fn identical_configs_give_identical_streams() {
    for kind in [AgentKind::BetaDqn, AgentKind::Dqn, AgentKind::EzGreedy] {
        let a = train(&EnvConfig::cliffwalk(), small(kind, 3)).unwrap();
        let b = train(&EnvConfig::cliffwalk(), small(kind, 3)).unwrap();
        assert_eq!(a.rows, b.rows, "{kind:?}");
        assert_eq!(a.visits, b.visits, "{kind:?}");
    }
}

#[test]
fn step_and_update_accounting() {
    for kind in [AgentKind::BetaDqn, AgentKind::Dqn, AgentKind::EzGreedy] {
        let cfg = small(kind, 1);
        let (total, warmup) = (cfg.total_steps, cfg.warmup);
        let m = train(&EnvConfig::cliffwalk(), cfg).unwrap();
        let mut sum = 0;
        for (i, r) in m.rows.iter().enumerate() {
            sum += r.length;
            assert_eq!(r.step, sum);
            assert_eq!(r.episode, i);
            assert!((0.0..=1.0).contains(&r.exploration_ratio));
            if let Some(arm) = r.arm {
                assert!(arm < m.policies.len());
            }
        }
        assert_eq!(sum, total);
        assert_eq!(m.updates, total / 4 - (warmup - 1) / 4, "{kind:?}");
        let steps: Vec<usize> = m.evals().map(|e| e.step).collect();
        assert_eq!(steps, vec![1_000, 2_000, 3_000, 4_000, 5_000]);
    }
}

#[test]
fn count_behavior_tracks_replay_mid_run() {
    let cfg = TrainConfig { replay_capacity: 700, ..small(AgentKind::BetaDqn, 2) };
    let mut t = Trainer::new(&EnvConfig::cliffwalk(), cfg).unwrap();
    while !t.finished() {
        t.run_episode().unwrap();
        let beta = t.beta().unwrap();
        let mut counts = vec![[0usize; 4]; 48];
        for tr in t.memory().iter() {
            counts[tr.state.index().unwrap()][tr.action] += 1;
        }
        for (s, c) in counts.iter().enumerate() {
            let total: usize = c.iter().sum();
            let p = beta_probs(beta, &GridObservation::Index(s)).unwrap();
            for (a, &n) in c.iter().enumerate() {
                let want = if total == 0 { 0.25 } else { n as f64 / total as f64 };
                assert!((p.probs()[a] - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn greedy_fraction_of_epsilon_greedy() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let q = [0.1, 0.5, -0.2, 0.3];
    let eps = 0.2;
    let n = 100_000;
    let greedy = (0..n).filter(|_| epsilon_greedy(&q, eps, &mut rng).0 == 1).count();
    let want = 1.0 - eps + eps / 4.0;
    let sd = (want * (1.0 - want) / n as f64).sqrt();
    assert!((greedy as f64 / n as f64 - want).abs() < 4.0 * sd);
}

#[test]
fn truncated_zeta_mean() {
    let max = 100;
    let h = |p: i32| (1..=max).map(|n| (n as f64).powi(-p)).sum::<f64>();
    let want = h(1) / h(2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let mut sum = 0usize;
    for _ in 0..n {
        let d = sample_duration(2.0, max, &mut rng);
        assert!((1..=max).contains(&d));
        sum += d;
    }
    let mean = sum as f64 / n as f64;
    assert!((mean - want).abs() / want < 0.02, "{mean} vs {want}");
}
