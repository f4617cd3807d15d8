use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use std::hint::black_box;

use anylil::bandit::{run_mest_lilucb, run_vanilla_lilucb, BanditConfig, VanillaParams};
use anylil::mestimators::{fit, LossSpec, SampleSet};
use anylil::rewards::{alpha_model_means, ProblemInstance, RewardModel, Scenario};
use anylil::rng::substream;

fn instance(k: usize) -> ProblemInstance {
    ProblemInstance::new(alpha_model_means(k, 0.3).unwrap(), Scenario::Gaussian.reward_kind(0.5, 0.05)).unwrap()
}

fn runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lilucb");
    group.sample_size(10);
    let median = BanditConfig::mest(0.1, 1.0, 0.5, LossSpec::absolute(0.97, 0.5), 470);
    let vanilla = BanditConfig::vanilla(0.1, VanillaParams::default());
    for k in [2usize, 8] {
        let inst = instance(k);
        group.bench_with_input(BenchmarkId::new("median", k), &inst, |b, inst| {
            b.iter(|| run_mest_lilucb(&median, inst, black_box(7)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("vanilla", k), &inst, |b, inst| {
            b.iter(|| run_vanilla_lilucb(&vanilla, inst, black_box(7)).unwrap())
        });
    }
    group.finish();
}

fn batch_fits(c: &mut Criterion) {
    let mut rng = substream(1, 0);
    let law = RewardModel::new(Scenario::Student.reward_kind(0.5, 0.05), 0.0).unwrap();
    let samples = SampleSet::from_values((0..1000).map(|_| law.sample(&mut rng)));
    let mut group = c.benchmark_group("fit_1000");
    for (name, loss) in [
        ("absolute", LossSpec::absolute(1.0, 0.5)),
        ("huber", LossSpec::huber(0.1, 1.0)),
    ] {
        group.bench_function(name, |b| {
            b.iter_batched(|| samples.clone(), |s| fit(&loss, &s).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

criterion_group!(benches, runs, batch_fits);
criterion_main!(benches);
