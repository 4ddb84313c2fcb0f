//! Sequential vs rayon maps over the two workloads the sweeps parallelize:
//! contraction trials across random MDPs and bandit Monte-Carlo seeds.

use std::hint::black_box;

#[cfg(feature = "parallel")]
use betadqn_core::parallel::map_parallel;
use betadqn_core::parallel::map_sequential;
use betadqn_core::theory::{contraction_check, random_mdp, run_cov_bandit, BanditInstance, RewardNoise};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn contraction(i: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(i);
    let mdp = random_mdp(10, 4, 0.9, &mut rng);
    contraction_check(&mdp, 200, &mut rng)
}

fn bandit(seed: u64) -> f64 {
    let b = BanditInstance::new(vec![0.9, 0.6, 0.4, 0.1], RewardNoise::Gaussian { sigma: 1.0 }, 0.1, 10_000)
        .expect("valid bandit");
    let run = run_cov_bandit(&b, &mut ChaCha8Rng::seed_from_u64(seed));
    run.pulls.iter().sum::<u64>() as f64
}

fn compare(c: &mut Criterion, name: &str, n: u64, f: fn(u64) -> f64) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
        b.iter(|| black_box(map_sequential((0..n).collect(), f)))
    });
    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
        b.iter(|| black_box(map_parallel((0..n).collect(), f)))
    });
    group.finish();
}

fn benches(c: &mut Criterion) {
    compare(c, "contraction", 32, contraction);
    compare(c, "bandit_seeds", 32, bandit);
}

criterion_group!(sweeps, benches);
criterion_main!(sweeps);
