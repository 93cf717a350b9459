use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kruskal_cmc::foliation::{build_family, leaf, locate};
use kruskal_cmc::slice::{build_slice_ivp, build_slice_quadrature, quadrature_r_grid, Branch};
use kruskal_cmc_bench::{curve, options, slice_cases, sparse_c_grid};

fn generators(c: &mut Criterion) {
    let opts = options(201);
    let mut group = c.benchmark_group("generators");
    for (name, p) in slice_cases() {
        group.bench_with_input(BenchmarkId::new("ivp_plus", name), &p, |b, p| {
            b.iter(|| build_slice_ivp(black_box(p), Branch::Plus, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadrature_plus", name), &p, |b, p| {
            b.iter(|| {
                let grid = quadrature_r_grid(p, Branch::Plus, 201, &opts).unwrap();
                build_slice_quadrature(black_box(p), Branch::Plus, &grid, &opts).unwrap()
            })
        });
    }
    group.finish();
}

fn leaves(c: &mut Criterion) {
    let fc = curve();
    let opts = options(801);
    let mut group = c.benchmark_group("leaves");
    for cv in [-20.0, -0.5, 0.5, 3.8125, 100.0] {
        group.bench_with_input(BenchmarkId::new("leaf", cv), &cv, |b, &cv| {
            b.iter(|| leaf(black_box(cv), &fc, &opts).unwrap())
        });
    }
    group.sample_size(10);
    group.bench_function("family_sparse", |b| {
        let grid = sparse_c_grid();
        b.iter(|| build_family(black_box(&grid), &fc, &opts).unwrap())
    });
    group.finish();
}

fn locate_points(c: &mut Criterion) {
    let fc = curve();
    let opts = options(801);
    let mut group = c.benchmark_group("locate");
    for (t, x) in [(-0.5, 0.7), (0.4, 2.1), (-1.2, 0.3)] {
        group.bench_function(format!("T{t}_X{x}"), |b| {
            b.iter(|| locate(black_box(t), black_box(x), &fc, 1e-9, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, generators, leaves, locate_points);
criterion_main!(benches);
