use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use olgdebt_core::foresight::BlockTridiagonal;
use olgdebt_core::linear::{sweep_multiplier, SweepAxis};
use olgdebt_core::{
    analytic_multiplier, calibrate_shock, determinacy_threshold, solve_path, table_cell, Calibration, FiscalPlan,
    Instrument, PlanKind, PreferenceKind, Regime, Scenario, SimOptions,
};

const NVARS: usize = 11;

/// Diagonally dominant test matrix with the solver's block structure.
fn banded(blocks: usize) -> BlockTridiagonal {
    let mut m = BlockTridiagonal::zeros(NVARS, blocks);
    for t in 0..blocks {
        for r in 0..NVARS {
            for c in 0..NVARS {
                let w = ((r * 7 + c * 3 + t) % 5) as f64 * 0.1;
                m.set(t, 0, r, c, if r == c { 4.0 + w } else { w * 0.2 });
                if t > 0 {
                    m.set(t, -1, r, c, -w * 0.3);
                }
                if t + 1 < blocks {
                    m.set(t, 1, r, c, w * 0.25);
                }
            }
        }
    }
    m
}

fn bench_banded(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_tridiagonal_solve");
    for blocks in [100, 200, 400] {
        let m = banded(blocks);
        let b: Vec<f64> = (0..m.dim()).map(|i| (i % 13) as f64 - 6.0).collect();
        group.bench_with_input(BenchmarkId::from_parameter(blocks), &blocks, |bench, _| {
            bench.iter(|| m.solve(black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn bench_analytic(c: &mut Criterion) {
    let calib = Calibration::baseline(PreferenceKind::Ghh);
    c.bench_function("analytic_multiplier", |b| {
        b.iter(|| analytic_multiplier(black_box(&calib), 0.5, Instrument::Debt, Regime::Zlb).unwrap())
    });
    c.bench_function("determinacy_threshold", |b| {
        b.iter(|| determinacy_threshold(black_box(&calib), Regime::Zlb).unwrap())
    });
    let grid: Vec<f64> = (0..1000).map(|j| 0.9 + 0.099 * j as f64 / 999.0).collect();
    c.bench_function("sweep_q_1000", |b| {
        b.iter(|| sweep_multiplier(&calib, SweepAxis::Q, black_box(&grid), 0.5, Instrument::Debt, Regime::Zlb))
    });
}

fn bench_foresight(c: &mut Criterion) {
    let opts = SimOptions::default();
    let calib = Calibration::baseline(PreferenceKind::LogLog);
    let shock = Scenario::Zlb.shock(&calib, &opts).unwrap();
    let mut group = c.benchmark_group("foresight");
    group.sample_size(20);
    group.bench_function("solve_path_zlb_temporary", |b| {
        b.iter(|| solve_path(&calib, black_box(&shock), &FiscalPlan::standard(PlanKind::Temporary), &opts).unwrap())
    });
    group.bench_function("calibrate_shock", |b| {
        b.iter(|| calibrate_shock(&calib, black_box(Scenario::ZLB_OUTPUT_DROP), 8, &opts).unwrap())
    });
    group.bench_function("table_cell_zlb_permanent", |b| {
        b.iter(|| table_cell(&calib, Scenario::Zlb, PlanKind::Permanent, black_box(&opts)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_banded, bench_analytic, bench_foresight);
criterion_main!(benches);
