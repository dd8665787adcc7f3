use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use regmhd::dynamics::{Dissipation, RhsEvaluator};
use regmhd::spectral::eval_symbol;
use regmhd::timestepper::Integrator;
use regmhd::{Scheme, SymbolSpec};
use regmhd_bench::{configs, fixture, SIZES};

fn transforms(c: &mut Criterion) {
    let config = &configs()[0].1;
    let mut group = c.benchmark_group("transform");
    for n in SIZES {
        let s = fixture(n, config);
        let f = s.v().x().clone();
        let grid = s.grid().clone();
        let values = grid.backward(&f).unwrap();
        group.bench_with_input(BenchmarkId::new("backward", n), &f, |b, f| b.iter(|| grid.backward(black_box(f)).unwrap()));
        group.bench_with_input(BenchmarkId::new("forward", n), &values, |b, v| b.iter(|| grid.forward(black_box(v)).unwrap()));
    }
    group.finish();
}

fn multipliers(c: &mut Criterion) {
    let config = &configs()[1].1;
    let mut group = c.benchmark_group("multiplier");
    for n in SIZES {
        let s = fixture(n, config);
        let f = s.v().x().clone();
        let spec = config.filter_symbol();
        group.bench_with_input(BenchmarkId::new("tabulate", n), &spec, |b, spec: &SymbolSpec| {
            b.iter(|| eval_symbol(black_box(spec), s.grid()).unwrap())
        });
        let table = eval_symbol(&spec, s.grid()).unwrap();
        group.bench_with_input(BenchmarkId::new("apply", n), &f, |b, f| b.iter(|| table.apply(black_box(f)).unwrap()));
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for (name, config) in configs() {
        let s = fixture(128, &config);
        let ev = RhsEvaluator::new(&config, s.grid()).unwrap();
        group.bench_function(BenchmarkId::new("velocity", name), |b| {
            b.iter(|| ev.velocity(black_box(&s), Dissipation::Omitted).unwrap())
        });
        group.bench_function(BenchmarkId::new("magnetic", name), |b| {
            b.iter(|| ev.magnetic(black_box(&s), Dissipation::Omitted).unwrap())
        });
    }
    group.finish();
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    let config = &configs()[0].1;
    for n in SIZES {
        let s = fixture(n, config);
        for scheme in [Scheme::IfRk4, Scheme::IfRk2] {
            let mut integ = Integrator::new(config, s.grid(), scheme).unwrap();
            group.bench_function(BenchmarkId::new(format!("{scheme:?}"), n), |b| {
                b.iter(|| integ.advance(black_box(&s), 1e-3).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, transforms, multipliers, rhs, step);
criterion_main!(benches);
