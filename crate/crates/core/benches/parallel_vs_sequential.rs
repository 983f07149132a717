use std::hint::black_box;

use atslab::calibration::{calibrate_surface, CalibrationConfig};
use atslab::market_data::{gen_synthetic_surface, SyntheticConfig};
use atslab::model::TenorParams;
use atslab::par::Execution;
use atslab::pricing::PricingGrid;
use atslab::sampling::{mc_price_strikes, RngSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let tenor = TenorParams::new(1.0, 0.2, 1.0, 0.5, 0.5).unwrap();
    let strikes: Vec<f64> = (0..9).map(|i| 80.0 + 5.0 * i as f64).collect();
    let mut group = c.benchmark_group("mc_price_strikes");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| {
                mc_price_strikes(
                    &tenor,
                    0.5,
                    100.0,
                    1.0,
                    black_box(&strikes),
                    1_000_000,
                    RngSpec::new(1, 0),
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn calibration(c: &mut Criterion) {
    let syn = gen_synthetic_surface(&SyntheticConfig::default(), &PricingGrid::default()).unwrap();
    let cfg = CalibrationConfig::default();
    let mut group = c.benchmark_group("calibrate_surface");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| calibrate_surface(black_box(&syn.surface), 0.5, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, calibration);
criterion_main!(benches);
