use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nmdrive_core::blp::{blp_measure, SearchConfig};
use nmdrive_core::generator::{full_generator, secular_generator};
use nmdrive_core::rates::rate_sample;
use nmdrive_core::rhp::{g_numeric, rhp_measure, ChoiProbe, RhpMethod};
use nmdrive_core::{grid_propagators, GeneratorSpec, IntegratorConfig, ModelParams, TimeGrid};

fn params() -> ModelParams {
    ModelParams::dimensionless(1.0, 10.0, 0.5, 1.0, 0.5).unwrap()
}

fn rates(c: &mut Criterion) {
    c.bench_function("rate_sample", |b| b.iter(|| rate_sample(black_box(3.7), 1.0, 10.0, 0.5).unwrap()));
}

fn generators(c: &mut Criterion) {
    let p = params();
    c.bench_function("secular_generator", |b| b.iter(|| secular_generator(black_box(3.7), &p).unwrap()));
    c.bench_function("full_generator", |b| b.iter(|| full_generator(black_box(3.7), &p).unwrap()));
}

fn propagators(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_propagators");
    group.sample_size(10);
    let cfg = IntegratorConfig::default();
    for horizon in [10.0, 30.0] {
        let grid = TimeGrid::uniform(horizon, 0.01).unwrap();
        let spec = GeneratorSpec::FullNonsecular(params());
        group.bench_with_input(BenchmarkId::from_parameter(horizon), &grid, |b, g| {
            b.iter(|| grid_propagators(&spec, g, &cfg).unwrap())
        });
    }
    group.finish();
}

fn divisibility(c: &mut Criterion) {
    let spec = GeneratorSpec::Secular(params());
    let probe = ChoiProbe::default();
    c.bench_function("g_numeric", |b| b.iter(|| g_numeric(&spec, black_box(3.7), &probe).unwrap()));
    let grid = TimeGrid::uniform(30.0, 0.01).unwrap();
    let mut group = c.benchmark_group("rhp_measure");
    group.sample_size(10);
    group.bench_function("numeric", |b| b.iter(|| rhp_measure(&spec, &grid, RhpMethod::Numeric, &probe).unwrap()));
    group.bench_function("analytic", |b| b.iter(|| rhp_measure(&spec, &grid, RhpMethod::SecularAnalytic, &probe).unwrap()));
    group.finish();
}

fn backflow(c: &mut Criterion) {
    let spec = GeneratorSpec::Secular(params());
    let grid = TimeGrid::uniform(30.0, 0.01).unwrap();
    let cfg = IntegratorConfig::default();
    let mut group = c.benchmark_group("blp_measure");
    group.sample_size(10);
    group.bench_function("default_search", |b| b.iter(|| blp_measure(&spec, &grid, &SearchConfig::default(), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, rates, generators, propagators, divisibility, backflow);
criterion_main!(benches);
