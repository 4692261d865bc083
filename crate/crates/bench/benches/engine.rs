use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hierfl_core::engine::{run_hier_local_qsgd, EngineConfig, Schedule};
use hierfl_core::latency::LatencyModel;
use hierfl_core::model::{LossModel, QuadraticModel};
use hierfl_core::quantizer::QuantizerSpec;
use hierfl_core::topology::{EdgeWeighting, Topology};

fn config(dim: usize, workers: usize) -> EngineConfig {
    let n = 20;
    EngineConfig {
        topology: Topology::contiguous(n, &[5, 5, 5, 5]).unwrap(),
        model: LossModel::Quadratic(
            QuadraticModel::iid(vec![1.0; dim], vec![0.0; dim], n, 1.0, 1).unwrap(),
        ),
        schedule: Schedule {
            tau1: 10,
            tau2: 5,
            cloud_rounds: 4,
            eta0: 0.01,
            eta_decay: 1.0,
            iters_per_epoch: 0,
        },
        q1: QuantizerSpec::RandomSparsification { dim, r: (dim / 20).max(1) },
        q2: QuantizerSpec::Identity { dim },
        weighting: EdgeWeighting::Weighted,
        seed: 3,
        init: vec![1.0; dim],
        latency: LatencyModel::zero(),
        wall_clock_budget_seconds: None,
        workers,
        keep_models: false,
        diagnostics: false,
    }
}

fn cloud_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("cloud_rounds");
    group.sample_size(20);
    for dim in [100usize, 1000] {
        let cfg = config(dim, 0);
        group.bench_function(BenchmarkId::new("sequential", dim), |b| {
            b.iter(|| black_box(run_hier_local_qsgd(black_box(&cfg)).unwrap()));
        });
        let cfg = config(dim, 4);
        group.bench_function(BenchmarkId::new("four_workers", dim), |b| {
            b.iter(|| black_box(run_hier_local_qsgd(black_box(&cfg)).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, cloud_rounds);
criterion_main!(benches);
