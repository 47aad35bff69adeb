use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cheapmix::asymptotics::{growth_experiment, ExperimentConfig};
use cheapmix::hull::{extremal_set_with, PointSet, DEFAULT_EXTREME_TOL};
use cheapmix::{seed, Execution, SamplerSpec};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn extremal(c: &mut Criterion) {
    let mut group = c.benchmark_group("extremal_set");
    for j in [3, 5] {
        let spec = SamplerSpec::uniform(j, 7).unwrap();
        let flat = spec.draw_flat(&mut seed::rng(7), 5_000);
        let ps = PointSet::from_flat(flat, j).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, j), &ps, |b, ps| {
                b.iter(|| extremal_set_with(ps, DEFAULT_EXTREME_TOL, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn growth(c: &mut Criterion) {
    let mut group = c.benchmark_group("growth_experiment");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = ExperimentConfig::uniform(3, vec![100, 1_000], 40, 3).unwrap();
        cfg.exec = exec;
        group.bench_function(name, |b| b.iter(|| growth_experiment(&cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, extremal, growth);
criterion_main!(benches);
