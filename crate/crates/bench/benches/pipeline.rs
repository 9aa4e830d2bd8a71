use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use surfspin::checks::builtin_case;
use surfspin::*;

fn assembly(c: &mut Criterion) {
    let case = builtin_case("torus", 0.7, 0.4, Units::default()).unwrap();
    let opts = AssemblyOptions::default();
    let grid = GridSpec::natural(case.chart.as_ref(), [32, 64], &opts).unwrap();
    c.bench_function("assemble torus 32x64", |b| {
        b.iter(|| assemble_surface_operator(case.chart.clone(), &case.field, black_box(&grid), Units::default(), &opts).unwrap())
    });
}

fn discretization(c: &mut Criterion) {
    let case = builtin_case("sphere", 0.5, 0.0, Units::default()).unwrap();
    let opts = AssemblyOptions::default();
    let grid = GridSpec::natural(case.chart.as_ref(), [32, 64], &opts).unwrap();
    let op = assemble_surface_operator(case.chart.clone(), &case.field, &grid, Units::default(), &opts).unwrap();
    c.bench_function("discretize sphere 32x64", |b| b.iter(|| discretize(black_box(&op)).unwrap()));
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigensolve");
    group.sample_size(10);
    let case = builtin_case("cylinder", 0.6, 0.3, Units::default()).unwrap();
    let opts = AssemblyOptions::default();
    for n in [16usize, 32] {
        let grid = GridSpec::natural(case.chart.as_ref(), [n, n], &opts).unwrap();
        let op = assemble_surface_operator(case.chart.clone(), &case.field, &grid, Units::default(), &opts).unwrap();
        let disc = discretize(&op).unwrap();
        let eig = EigenOptions::new(8).with_tol(1e-8);
        group.bench_function(format!("cylinder {n}x{n} k=8"), |b| {
            b.iter_batched(|| eig.clone(), |o| eigensolve(&disc, &o).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, discretization, eigensolver);
criterion_main!(benches);
