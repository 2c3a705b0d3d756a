use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ghost_core::analysis::{pooled_autocorrelation, run_sweep_with, MaskRole, RegionMask, SweepSpec};
use ghost_core::basis::{canonical_basis, modify_basis};
use ghost_core::virtual_bench::{
    default_background_rect, synth_bar_target, MeasurementPlan, Method, NoiseModel, ProtocolConfig,
};
use ghost_core::{Exec, GridSpec, Image, Kernel};
use std::hint::black_box;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn plan_and_acquire(c: &mut Criterion) {
    let grid = GridSpec::new(64).unwrap();
    let object = synth_bar_target(grid, 3).unwrap();
    let modified = modify_basis(&canonical_basis(grid), &Kernel::edge()).unwrap();
    let noise = NoiseModel::for_grid(grid).with_seed(1);
    let protocol = ProtocolConfig::new(20.0, Method::BasisProcessed);

    let mut group = c.benchmark_group("plan_64");
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| MeasurementPlan::decomposed(black_box(&object), &modified, exec).unwrap())
        });
    }
    group.finish();

    let plan = MeasurementPlan::decomposed(&object, &modified, Exec::default()).unwrap();
    let mut group = c.benchmark_group("acquire_64");
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| plan.acquire(black_box(&noise), &protocol, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let grid = GridSpec::new(32).unwrap();
    let object = synth_bar_target(grid, 2).unwrap();
    let bg = RegionMask::from_rect(grid, default_background_rect(grid), MaskRole::Background).unwrap();
    let spec = SweepSpec::new(
        Kernel::edge(),
        NoiseModel::for_grid(grid).with_seed(2),
        vec![20.0, 100.0, 220.0],
        3,
        bg,
    );
    let mut group = c.benchmark_group("sweep_32");
    group.sample_size(20);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sweep_with(exec, black_box(&object), &spec).unwrap())
        });
    }
    group.finish();
}

fn autocorrelation(c: &mut Criterion) {
    let grid = GridSpec::new(32).unwrap();
    let images: Vec<Image> = (0..4)
        .map(|k| Image::from_fn(grid, |r, col| ((r * 31 + col * 17 + k * 7) as f64).sin()))
        .collect();
    let mut group = c.benchmark_group("autocorrelation_32x4");
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pooled_autocorrelation(black_box(&images), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, plan_and_acquire, sweep, autocorrelation);
criterion_main!(benches);
