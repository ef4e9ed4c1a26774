use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ep_lab_core::{preset, run_sweep_with_threads, PRESET_NAMES};

fn presets(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    for name in PRESET_NAMES {
        let cfg = preset(name).unwrap();
        group.bench_with_input(BenchmarkId::new("single_thread", name), &cfg, |b, cfg| {
            b.iter(|| run_sweep_with_threads(cfg, 1).unwrap())
        });
    }
    let dense = preset("fig1_left").unwrap().with_grid_count(20_001);
    group.bench_function("fig1_left_20001_auto", |b| {
        b.iter(|| run_sweep_with_threads(&dense, 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, presets);
criterion_main!(benches);
