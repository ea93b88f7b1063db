use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfwm_bench::{setup, silica};
use sfwm_core::fourier::Fourier2d;
use sfwm_core::pump::{evolve_pump_step, IntensityConvolver};
use sfwm_core::{coupling_w, purity, schmidt, RamanModel, RamanResponse, ResponseGrid};
use std::hint::black_box;

fn response(c: &mut Criterion) {
    c.bench_function("response/build_silica", |b| {
        b.iter(|| RamanResponse::build(RamanModel::silica(black_box(0.18)).unwrap(), ResponseGrid::default()).unwrap())
    });
    let r = silica(0.18);
    let (pump, spec) = setup(512);
    c.bench_function("response/coupling_w_512", |b| {
        b.iter(|| coupling_w(&r, black_box(spec.detuning), 295.0, pump.axis()).unwrap())
    });
}

fn pump(c: &mut Criterion) {
    let r = silica(0.18);
    let (p, _) = setup(512);
    let conv = IntensityConvolver::new(&r, p.axis()).unwrap();
    c.bench_function("pump/spm_step_512", |b| b.iter(|| evolve_pump_step(black_box(&p), &conv, 0.01).unwrap()));
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("fourier2d");
    for n in [128usize, 256, 512] {
        let (p, spec) = setup(n);
        let a = sfwm_core::analytic::jta_long_pulse(&p, &spec, &RamanResponse::instantaneous(), false).unwrap();
        let f = Fourier2d::new(a.signal, a.idler);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| a.to_spectral_with(&f)));
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("purity");
    g.sample_size(10);
    for n in [128usize, 256] {
        let (p, spec) = setup(n);
        let a = sfwm_core::analytic::jta_long_pulse(&p, &spec, &silica(0.18), true).unwrap();
        g.bench_with_input(BenchmarkId::new("gram", n), &a, |b, a| b.iter(|| purity(a)));
        g.bench_with_input(BenchmarkId::new("svd", n), &a, |b, a| b.iter(|| schmidt(a).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, response, pump, transforms, decomposition);
criterion_main!(benches);
