use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratkrylov::diagnostics::generate::{complex_normal, random_hessenberg};
use ratkrylov::structured::{qr_hessenberg, transfer_through, turnover, TransferDirection};
use ratkrylov::CoreTransformation;

fn bench_turnover(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut core = |i| CoreTransformation::rotation(i, complex_normal(&mut rng), complex_normal(&mut rng));
    let (g1, g2, g3) = (core(1), core(2), core(1));
    c.bench_function("turnover", |b| b.iter(|| turnover(black_box(&g1), black_box(&g2), black_box(&g3)).unwrap()));
}

fn bench_qr_transfer(c: &mut Criterion) {
    let mut group = c.benchmark_group("hessenberg");
    for n in [16, 64, 128] {
        let h = random_hessenberg(&mut ChaCha8Rng::seed_from_u64(n as u64), n);
        group.bench_with_input(BenchmarkId::new("qr", n), &h, |b, h| b.iter(|| qr_hessenberg(black_box(h)).unwrap()));
        let (q, r) = qr_hessenberg(&h).unwrap();
        group.bench_with_input(BenchmarkId::new("transfer", n), &(q, r), |b, (q, r)| {
            b.iter(|| transfer_through(black_box(q), black_box(r), TransferDirection::LeftToRight).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_turnover, bench_qr_transfer);
criterion_main!(benches);
