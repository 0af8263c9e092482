use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stable_spectral::oracle::{estimate_survival, PathConfig};
use stable_spectral::wiener_hopf::phi;
use stable_spectral::*;
use stable_spectral_bench::{label, params, CASES};

fn double_sine(c: &mut Criterion) {
    let ev = S2Evaluator::new(1.7).unwrap();
    let mut g = c.benchmark_group("s2");
    g.bench_function("strip", |b| b.iter(|| ev.s2(black_box(Complex64::new(0.9, 0.4)))));
    // two ladder steps out of the strip
    g.bench_function("ladder", |b| b.iter(|| ev.s2(black_box(Complex64::new(-2.3, 0.4)))));
    g.bench_function("setup", |b| b.iter(|| S2Evaluator::new(black_box(1.7))));
    g.finish();
}

fn wiener_hopf(c: &mut Criterion) {
    let mut g = c.benchmark_group("phi");
    for (a, r) in CASES {
        let p = params(a, r);
        g.bench_with_input(BenchmarkId::from_parameter(label(a, r)), &p, |b, p| {
            b.iter(|| phi(p, Extremum::Supremum, black_box(Complex64::new(1.0, 0.5))))
        });
    }
    g.finish();
}

fn eigenfunction(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenfn");
    for (a, r) in CASES {
        let p = params(a, r);
        g.bench_function(BenchmarkId::new("build", label(a, r)), |b| {
            b.iter(|| EigenFn::new(black_box(&p), Direction::Primal))
        });
        let f = EigenFn::new(&p, Direction::Primal).unwrap();
        g.bench_function(BenchmarkId::new("eval", label(a, r)), |b| b.iter(|| f.f(black_box(1.3))));
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for (a, r) in CASES {
        let m = SpectralModel::new(&params(a, r), SpectralConfig::default()).unwrap();
        g.bench_function(BenchmarkId::new("survival", label(a, r)), |b| {
            b.iter(|| m.survival(black_box(1.0), black_box(1.0)))
        });
        if a > 1.0 || r == 0.5 {
            g.bench_function(BenchmarkId::new("density", label(a, r)), |b| {
                b.iter(|| m.transition_density(black_box(1.0), black_box(1.5), black_box(0.7)))
            });
        }
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let p = params(1.5, 0.6);
    // 10⁵ increments per iteration
    let cfg = PathConfig::new(1_000, 0.01, 1.0, 3).unwrap();
    g.bench_function("survival_1e5_steps", |b| b.iter(|| estimate_survival(&p, black_box(1.0), 1.0, &cfg)));
    g.finish();
}

criterion_group!(benches, double_sine, wiener_hopf, eigenfunction, kernels, monte_carlo);
criterion_main!(benches);
