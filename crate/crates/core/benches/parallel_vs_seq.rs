use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use wqh_core::par::map_collect;
use wqh_core::uqsl2::{solve_rmatrix, weyl_module};

// Every R-matrix block of the alcove at ℓ = 6, solved pair by pair.
fn rmatrix_blocks(c: &mut Criterion) {
    let ell = 6;
    let modules: Vec<_> = (0..ell - 1).map(|m| weyl_module(m, ell).unwrap()).collect();
    let pairs: Vec<(usize, usize)> = (0..modules.len()).flat_map(|a| (0..modules.len()).map(move |b| (a, b))).collect();
    let mut group = c.benchmark_group("rmatrix_blocks");
    group.sample_size(10);
    group.bench_function("map_collect", |b| {
        b.iter(|| map_collect(black_box(&pairs), |&(x, y)| solve_rmatrix(&modules[x], &modules[y]).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(&pairs)
                .iter()
                .map(|&(x, y)| solve_rmatrix(&modules[x], &modules[y]).unwrap())
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

criterion_group!(benches, rmatrix_blocks);
criterion_main!(benches);
