//! Parallel against sequential execution of the per-point sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use randers_core::catalog::{self, CatalogParams, Geometry};
use randers_core::finsler::{bh_volume, FinslerMetric};
use randers_core::par::Execution;
use randers_core::screener::{screen, SamplePlan};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn screener(c: &mut Criterion) {
    let mut group = c.benchmark_group("screen");
    group.sample_size(10);
    for name in ["bao-shen", "random-killing"] {
        let entry = catalog::build(name, &CatalogParams::default()).unwrap();
        for (mode, exec) in MODES {
            let plan = SamplePlan {
                points: 16,
                exec,
                ..SamplePlan::default()
            };
            group.bench_with_input(BenchmarkId::new(mode, name), &plan, |b, plan| {
                b.iter(|| screen(name, &entry.geometry, plan).unwrap())
            });
        }
    }
    group.finish();
}

fn volume(c: &mut Criterion) {
    let entry = catalog::build("random", &CatalogParams::default()).unwrap();
    let Geometry::Coordinate(spec) = entry.geometry else {
        unreachable!()
    };
    let x = spec.center();
    let m = FinslerMetric::randers(spec);
    let mut group = c.benchmark_group("bh_volume");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| bh_volume(&m, &x, 1 << 20, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, screener, volume);
criterion_main!(benches);
