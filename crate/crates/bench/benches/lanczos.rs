use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratkrylov::dense::c64;
use ratkrylov::diagnostics::experiment::{run_experiment, ExperimentConfig};
use ratkrylov::diagnostics::generate::{gen_upper_triangular, random_complex_vector};
use ratkrylov::{rat_lan, LanczosConfig, ProjectivePole};

fn bench_rat_lan(c: &mut Criterion) {
    let mut group = c.benchmark_group("rat_lan");
    group.sample_size(20);
    for m in [50, 200] {
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        let eigs: Vec<_> = (1..=m).map(|i| c64(i as f64, 0.0)).collect();
        let a = gen_upper_triangular(&mut rng, &eigs);
        let v = random_complex_vector(&mut rng, m);
        let poles = [ProjectivePole::real(0.0), ProjectivePole::real(m as f64 / 2.0 + 0.1)];
        let n = 40.min(m - 5);
        group.bench_with_input(BenchmarkId::from_parameter(m), &(a, v), |b, (a, v)| {
            b.iter(|| rat_lan(black_box(a), black_box(v), v, n, &poles, &poles, &LanczosConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_example1(c: &mut Criterion) {
    let cfg = ExperimentConfig::example1(0);
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("example1", |b| b.iter(|| run_experiment(black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_rat_lan, bench_example1);
criterion_main!(benches);
