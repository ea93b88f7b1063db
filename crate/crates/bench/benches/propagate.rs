use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfwm_bench::{setup, silica};
use sfwm_core::analytic::jta_general_quadrature;
use sfwm_core::propagator::propagate;
use sfwm_core::{QuadratureOptions, StepPlan};

fn split_step(c: &mut Criterion) {
    let r = silica(0.18);
    let mut g = c.benchmark_group("split_step");
    g.sample_size(10);
    for n in [128usize, 256] {
        let (pump, spec) = setup(n);
        g.bench_with_input(BenchmarkId::new("32_steps", n), &n, |b, _| {
            b.iter(|| propagate(&pump, &spec, &r, &StepPlan::new(32)).unwrap())
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let r = silica(0.18);
    let (pump, spec) = setup(128);
    let mut g = c.benchmark_group("quadrature");
    g.sample_size(10);
    g.bench_function("128", |b| {
        b.iter(|| jta_general_quadrature(&pump, &spec, &r, &QuadratureOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, split_step, quadrature);
criterion_main!(benches);
