use betadqn_core::approx::mlp::{cross_entropy_loss, squared_td_loss, Adam, AdamConfig, Mlp, MlpInput};
use betadqn_core::approx::{beta_probs, update_beta, BehaviorFunction};
use betadqn_core::env::GridObservation;
use betadqn_core::replay::{ReplayMemory, Transition};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tr(s: usize, a: usize) -> Transition {
    Transition {
        state: GridObservation::Index(s),
        action: a,
        reward: 0.0,
        next_state: GridObservation::Index(s),
        done: false,
    }
}

/// Upper 1% point of χ² with `k` degrees of freedom (Wilson–Hilferty).
fn chi2_critical_99(k: f64) -> f64 {
    let z = 2.326_347_874;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z * c.sqrt()).powi(3)
}

#[test]
fn sampling_is_uniform_over_contents() {
    let mut mem = ReplayMemory::new(100);
    for i in 0..250 {
        mem.push(tr(i, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut hist = vec![0u64; 250];
    let draws = 100_000;
    for _ in 0..draws / 32 + 1 {
        for t in mem.sample(32, &mut rng).unwrap() {
            hist[t.state.index().unwrap()] += 1;
        }
    }
    // Only the newest hundred survive.
    assert!(hist[..150].iter().all(|&c| c == 0));
    let n: u64 = hist.iter().sum();
    let expected = n as f64 / 100.0;
    let chi2: f64 = hist[150..].iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < chi2_critical_99(99.0), "χ² = {chi2}");
}

#[test]
fn wilson_hilferty_matches_table_value() {
    // Tabulated χ²_{0.99}(99) = 134.642.
    assert!((chi2_critical_99(99.0) - 134.642).abs() < 0.1);
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Central differences of `loss` at every parameter.
fn numeric_grad(net: &Mlp, loss: impl Fn(&Mlp) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut probe = net.clone();
    (0..net.params().len())
        .map(|i| {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + h;
            let up = loss(&probe);
            probe.params_mut()[i] = orig - h;
            let down = loss(&probe);
            probe.params_mut()[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_case(seed: u64) -> (Mlp, Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = rng.random_range(1..=20);
    let hidden = rng.random_range(1..=16);
    let output = rng.random_range(2..=5);
    let mut net = Mlp::new(input, hidden, output, &mut rng);
    // Nonzero biases so ReLU kinks are away from the probes.
    for p in net.params_mut() {
        *p += rng.random_range(-0.05..0.05);
    }
    let batch = rng.random_range(1..=8);
    let xs: Vec<Vec<f64>> = (0..batch).map(|_| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let actions = (0..batch).map(|_| rng.random_range(0..output)).collect();
    let targets = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
    (net, xs, actions, targets)
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let (net, xs, actions, targets) = random_case(seed);
        let inputs: Vec<MlpInput> = xs.iter().map(|x| MlpInput::Dense(x)).collect();

        let (_, g) = squared_td_loss(&net, &inputs, &actions, &targets);
        let num = numeric_grad(&net, |n| squared_td_loss(n, &inputs, &actions, &targets).0);
        for (a, b) in g.iter().zip(&num) {
            if a.abs().max(b.abs()) > 1e-7 {
                worst = worst.max(rel_err(*a, *b));
            }
        }

        let (_, g) = cross_entropy_loss(&net, &inputs, &actions);
        let num = numeric_grad(&net, |n| cross_entropy_loss(n, &inputs, &actions).0);
        for (a, b) in g.iter().zip(&num) {
            if a.abs().max(b.abs()) > 1e-7 {
                worst = worst.max(rel_err(*a, *b));
            }
        }
    }
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn binary_input_gradients_equal_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = Mlp::new(12, 8, 3, &mut rng);
    let active = [1u32, 4, 11];
    let mut dense = vec![0.0; 12];
    for &i in &active {
        dense[i as usize] = 1.0;
    }
    let (la, ga) = cross_entropy_loss(&net, &[MlpInput::Binary(&active)], &[2]);
    let (lb, gb) = cross_entropy_loss(&net, &[MlpInput::Dense(&dense)], &[2]);
    assert!((la - lb).abs() < 1e-12);
    for (a, b) in ga.iter().zip(&gb) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mlp_beta_loss_decreases_over_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut beta = BehaviorFunction::mlp(6, 16, 3, &mut rng);
    let feats: Vec<GridObservation> =
        (0..6u32).map(|i| GridObservation::Features { dim: 6, active: vec![i] }).collect();
    let batch_owned: Vec<Transition> = (0..32)
        .map(|i| Transition {
            state: feats[i % 6].clone(),
            action: (i / 6) % 3,
            reward: 0.0,
            next_state: feats[0].clone(),
            done: false,
        })
        .collect();
    let batch: Vec<&Transition> = batch_owned.iter().collect();
    let losses: Vec<f64> = (0..1000).map(|_| update_beta(&mut beta, &batch, 1e-3).unwrap()).collect();
    let windows: Vec<f64> = losses.chunks(100).map(|w| w.iter().sum::<f64>() / 100.0).collect();
    for pair in windows.windows(2) {
        assert!(pair[1] < pair[0], "window means {windows:?}");
    }
    let p = beta_probs(&beta, &feats[0]).unwrap();
    assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    // With bias correction the first step is lr·sign(g) up to the ε term.
    let mut adam = Adam::new(3, AdamConfig::default());
    let mut p = vec![0.0, 0.0, 0.0];
    adam.step(&mut p, &[2.0, -0.5, 1e-3], 0.01);
    for (v, s) in p.iter().zip([-1.0, 1.0, -1.0]) {
        assert!((v - s * 0.01).abs() < 1e-6, "{p:?}");
    }
}

proptest! {
    #[test]
    fn counts_beta_matches_memory_frequencies(
        ops in proptest::collection::vec((0usize..5, 0usize..4), 1..400),
        cap in 1usize..60,
    ) {
        let mut mem = ReplayMemory::new(cap);
        let mut beta = BehaviorFunction::counts(5, 4);
        for (s, a) in ops {
            let t = tr(s, a);
            beta.observe_insert(&t).unwrap();
            if let Some(old) = mem.push(t) {
                beta.observe_evict(&old).unwrap();
            }
        }
        for s in 0..5 {
            let mut counts = [0usize; 4];
            for t in mem.iter().filter(|t| t.state.index() == Some(s)) {
                counts[t.action] += 1;
            }
            let total: usize = counts.iter().sum();
            let p = beta_probs(&beta, &GridObservation::Index(s)).unwrap();
            for (a, &c) in counts.iter().enumerate() {
                let want = if total == 0 { 0.25 } else { c as f64 / total as f64 };
                prop_assert!((p.probs()[a] - want).abs() < 1e-12);
            }
        }
    }
}
