use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdm_bench::{families, potentials};
use pdm_core::{
    sinh2_wkb_spectrum, solve_halfline, solve_levels, wkb_quantize, FirstKindOscillator, PotentialSpec, SolverConfig,
};
use std::hint::black_box;

fn wkb(c: &mut Criterion) {
    c.bench_function("sinh2_wkb_spectrum/10", |b| b.iter(|| sinh2_wkb_spectrum(black_box(9)).unwrap()));
    let mut g = c.benchmark_group("wkb_quantize");
    for (name, v) in potentials() {
        g.bench_with_input(BenchmarkId::new(name, 10), &v, |b, v| b.iter(|| wkb_quantize(v, black_box(10)).unwrap()));
    }
    g.finish();
}

fn numerov(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("solve_levels");
    g.sample_size(10);
    for (name, v) in potentials() {
        g.bench_with_input(BenchmarkId::new(name, 10), &v, |b, v| {
            b.iter(|| solve_levels(v, black_box(9), &cfg).unwrap())
        });
    }
    let squeezed = PotentialSpec::squeezed(0.0, 1.0).unwrap();
    g.bench_function("squeezed_halfline/6", |b| b.iter(|| solve_halfline(&squeezed, black_box(5), &cfg).unwrap()));
    g.finish();

    let mut g = c.benchmark_group("first_kind_spectrum");
    g.sample_size(10);
    for (name, fam) in families() {
        let osc = FirstKindOscillator::new(fam).unwrap();
        g.bench_function(BenchmarkId::new(name, 6), |b| b.iter(|| osc.spectrum(black_box(5), &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, wkb, numerov);
criterion_main!(benches);
