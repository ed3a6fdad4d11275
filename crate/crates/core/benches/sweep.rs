use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rwa_core::par::Execution;
use rwa_core::sweep::{run_sweep, SweepConfig};

const CONFIG: &str = "
[sweep]
axis = spin
start = 1/2
stop = 5
count = 10
variants = general, scaling, intermediate

[fixed]
excitations = 5
omega = 3000
lambda = 0.3
omega_time = pi/4
";

fn sweep(c: &mut Criterion) {
    let config = SweepConfig::parse(CONFIG).expect("bench config parses");
    let mut group = c.benchmark_group("spin_sweep");
    group.sample_size(10);
    for (name, exec) in [("serial", Execution::Serial), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| run_sweep(black_box(&config), exec).expect("sweep runs"))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
