use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratkrylov::dense::c64;
use ratkrylov::diagnostics::generate::{random_complex_matrix, random_complex_vector};
use ratkrylov::{rational_arnoldi, ProjectivePole};

fn bench_arnoldi(c: &mut Criterion) {
    let mut group = c.benchmark_group("rational_arnoldi");
    group.sample_size(20);
    for m in [50, 200] {
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        let a = random_complex_matrix(&mut rng, m, m);
        let v = random_complex_vector(&mut rng, m);
        let r = 2.0 * (m as f64).sqrt();
        let poles: Vec<ProjectivePole> =
            [ProjectivePole::infinity(), ProjectivePole::finite(c64(r, 0.0)), ProjectivePole::finite(c64(0.0, r))]
                .into_iter()
                .cycle()
                .take(20)
                .collect();
        group.bench_with_input(BenchmarkId::from_parameter(m), &(a, v), |b, (a, v)| {
            b.iter(|| rational_arnoldi(black_box(a), black_box(v), &poles, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_arnoldi);
criterion_main!(benches);
