use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use popcast_core::diagnostics::ClusterConfig;
use popcast_core::synthgen::{diurnal_stream, Diurnal};
use popcast_core::{
    build_timebase, fit_grid, generate, split, sweep, Dataset, Forecaster, GrowthConfig,
    KnotPolicy, ModelKind, SplitSpec, SweepConfig, Timestamp,
};

fn dataset() -> Dataset {
    generate(&GrowthConfig {
        n_submissions: 500,
        horizon: 240.0,
        seed: 3,
        ..Default::default()
    })
    .unwrap()
    .dataset
}

fn sweep_config() -> SweepConfig {
    SweepConfig {
        t_r: 240.0,
        ..Default::default()
    }
}

fn bench_generate(c: &mut Criterion) {
    let cfg = GrowthConfig {
        n_submissions: 500,
        horizon: 240.0,
        emit_events: true,
        diurnal: Some(Diurnal { amplitude: 0.5, peak_hour: 20.0 }),
        ..Default::default()
    };
    c.bench_function("generate 500x240h with events", |b| {
        b.iter(|| generate(black_box(&cfg)).unwrap())
    });
}

fn bench_timebase(c: &mut Criterion) {
    let diurnal = Diurnal { amplitude: 0.5, peak_hour: 20.0 };
    let stream = diurnal_stream(2000.0, Some(diurnal), Timestamp(0.0), 24.0 * 14.0, 1).unwrap();
    c.bench_function("build_timebase 670k events", |b| {
        b.iter(|| build_timebase(black_box(&stream), None, KnotPolicy::PerEvent).unwrap())
    });
    let tb = build_timebase(&stream, None, KnotPolicy::PerEvent).unwrap();
    let (s, e) = tb.range();
    c.bench_function("to_digg_time", |b| {
        b.iter(|| tb.to_digg_time(black_box(s), black_box(Timestamp((s.0 + e.0) / 2.0))).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let ds = dataset();
    let (training, _) = split(&ds, SplitSpec::RandomHalf(1)).unwrap();
    let mut group = c.benchmark_group("fit_grid");
    group.bench_function("cluster filter", |b| {
        b.iter(|| fit_grid(black_box(&training), &sweep_config()).unwrap())
    });
    let plain = SweepConfig {
        cluster: ClusterConfig::disabled(),
        ..sweep_config()
    };
    group.bench_function("no filter", |b| b.iter(|| fit_grid(black_box(&training), &plain).unwrap()));
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let ds = dataset();
    let (training, test) = split(&ds, SplitSpec::RandomHalf(1)).unwrap();
    let cfg = sweep_config();
    let grid = fit_grid(&training, &cfg).unwrap();
    let fs: Vec<_> = ModelKind::ALL.iter().map(|&k| grid.forecaster(k)).collect();
    let refs: Vec<&dyn Forecaster> = fs.iter().map(|f| f as &dyn Forecaster).collect();
    let ages = grid.indicator_ages();
    c.bench_function("sweep 3 models", |b| {
        b.iter(|| sweep(black_box(&test), cfg.t_r, &ages, &refs).unwrap())
    });
}

criterion_group!(benches, bench_generate, bench_timebase, bench_fit, bench_sweep);
criterion_main!(benches);
