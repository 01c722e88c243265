use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use boundent::analysis::{max_product_overlap, SeesawConfig};
use boundent::bundled;
use boundent::states::smolin;
use boundent::tomography::{monte_carlo_multi, McConfig, Statistic};
use boundent::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mc_iterations(c: &mut Criterion) {
    let tables = bundled::unlocking_counts().unwrap();
    let stats = [Statistic::Tangle, Statistic::MinPtEig];
    let mut group = c.benchmark_group("mc_iterations");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = McConfig {
            iterations: 64,
            seed: 1,
            execution,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new(name, cfg.iterations), &cfg, |b, cfg| {
            b.iter(|| monte_carlo_multi(&tables, &stats, cfg).unwrap())
        });
    }
    group.finish();
}

fn seesaw_restarts(c: &mut Criterion) {
    let rho = smolin();
    let mut group = c.benchmark_group("seesaw_restarts");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = SeesawConfig {
            restarts: 32,
            seed: 1,
            execution,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new(name, cfg.restarts), &cfg, |b, cfg| {
            b.iter(|| max_product_overlap(&rho, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mc_iterations, seesaw_restarts);
criterion_main!(benches);
