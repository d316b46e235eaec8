use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use setlat::{lattice_inf, lattice_sup_2d, Cone, GValue};

fn values(cone: &Arc<Cone>, count: usize, gens: usize, seed: u64) -> Vec<GValue> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = (0..gens).map(|_| (0..cone.dim()).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
            GValue::new(cone.clone(), g).unwrap()
        })
        .collect()
}

fn lattice(c: &mut Criterion) {
    let plane = Arc::new(Cone::orthant(2).unwrap());
    let space = Arc::new(Cone::orthant(3).unwrap());
    let mut g = c.benchmark_group("lattice_inf");
    for n in [10, 100, 1000] {
        let v2 = values(&plane, n, 8, 1);
        let v3 = values(&space, n, 8, 1);
        g.bench_with_input(BenchmarkId::new("d2", n), &v2, |b, v| b.iter(|| lattice_inf(black_box(v)).unwrap()));
        g.bench_with_input(BenchmarkId::new("d3", n), &v3, |b, v| b.iter(|| lattice_inf(black_box(v)).unwrap()));
    }
    g.finish();

    let pair = values(&plane, 2, 40, 2);
    c.bench_function("oplus_40x40", |b| b.iter(|| black_box(&pair[0]).oplus(&pair[1]).unwrap()));
    let family = values(&plane, 20, 10, 3);
    c.bench_function("lattice_sup_2d_20", |b| b.iter(|| lattice_sup_2d(black_box(&family)).unwrap()));
    let a = &family[0];
    c.bench_function("support_d2", |b| b.iter(|| a.support(black_box(&[0.3, 0.7])).unwrap()));
}

criterion_group!(benches, lattice);
criterion_main!(benches);
