use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ml_counts::exact::{bernoulli_profile_with, log_mgf_from_profile};
use ml_counts::sampler::sample_counts_with;
use ml_counts::{Disk, DiskSystem, EnsembleParams, Execution};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn disks() -> DiskSystem {
    DiskSystem::new(vec![Disk::fixed(0.4, 0.3), Disk::fixed(0.7, -0.2), Disk::edge(0.0, 0.5)]).unwrap()
}

fn profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_log_mgf");
    group.sample_size(10);
    let d = disks();
    for n in [2_000usize, 20_000] {
        let p = EnsembleParams::new(1.0, 0.0, n).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    let prof = bernoulli_profile_with(&p, &d, exec).unwrap();
                    black_box(log_mgf_from_profile(&prof, &d.u(), exec).unwrap())
                })
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_counts");
    group.sample_size(10);
    let d = disks();
    let p = EnsembleParams::new(1.0, 0.0, 1_000).unwrap();
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| black_box(sample_counts_with(&p, &d, 2_000, 7, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, profile, sampling);
criterion_main!(benches);
