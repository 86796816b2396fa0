//! Parallel vs sequential comparison for the data-parallel inner loops.
//!
//! Run with `cargo bench -p tgem`. The `*_par` entries use rayon (the
//! default `parallel` feature); the `*_seq` entries force the sequential
//! reference path, so one run shows the speedup on this machine.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tgem::horizon::{default_horizons, default_horizons_seq, HorizonPolicy};
use tgem::model::{Tgem, Timescale};
use tgem::sampler::sample;
use tgem::search::{forward_neighborhood, SearchOptions};
use tgem::stream::EventStream;

/// A 5-node model with mixed structure, sampled long enough that horizon
/// scans and neighborhood scoring dominate.
fn fixture() -> EventStream {
    let labels: Vec<String> = (0..5).map(|i| format!("n{i}")).collect();
    let mut m = Tgem::empty(labels).unwrap();
    m.add_edge(0, 1, Timescale::single(2.0).unwrap()).unwrap();
    m.add_edge(1, 2, Timescale::new(vec![4.0, 8.0]).unwrap()).unwrap();
    m.add_edge(3, 3, Timescale::single(1.0).unwrap()).unwrap();
    m.add_edge(3, 4, Timescale::single(16.0).unwrap()).unwrap();
    m.set_rates(0, vec![0.32]).unwrap();
    m.set_rates(1, vec![0.04, 0.64]).unwrap();
    m.set_rates(2, vec![0.02, 0.08, 0.16, 0.32]).unwrap();
    m.set_rates(3, vec![0.08, 0.32]).unwrap();
    m.set_rates(4, vec![0.01, 0.16]).unwrap();
    sample(&m, 2000.0, 7).unwrap()
}

fn bench_horizons(c: &mut Criterion) {
    let stream = fixture();
    let mut group = c.benchmark_group("proximal_horizons");
    group.sample_size(10);
    group.bench_function("par", |b| {
        b.iter(|| default_horizons(black_box(&stream), HorizonPolicy::Proximal).unwrap())
    });
    group.bench_function("seq", |b| {
        b.iter(|| default_horizons_seq(black_box(&stream), HorizonPolicy::Proximal).unwrap())
    });
    group.finish();
}

fn bench_neighborhood(c: &mut Criterion) {
    let stream = fixture();
    let horizons = default_horizons(&stream, HorizonPolicy::Proximal).unwrap();
    let empty = Tgem::empty(stream.vocabulary().to_vec()).unwrap();
    let opts = SearchOptions::with_caps(2, 4);
    let mut group = c.benchmark_group("forward_neighborhood");
    group.sample_size(10);
    // The scoring facade switches on the `parallel` feature; build the
    // crate with `--no-default-features` to time the sequential path here.
    group.bench_function("empty_model", |b| {
        b.iter(|| forward_neighborhood(black_box(&stream), &empty, &horizons, &opts).unwrap())
    });
    group.finish();
}

fn bench_grid(c: &mut Criterion) {
    use tgem::bench::{run_benchmark, BenchConfig, RunOptions};
    let config = BenchConfig {
        nodes: vec![5],
        densities: vec![0.2],
        time_units: vec![500.0, 2000.0],
        replicates: 4,
        heuristics: vec!["proximal".into(), "q=0.5".into()],
        ..BenchConfig::default()
    };
    let mut group = c.benchmark_group("benchmark_grid_16_units");
    group.sample_size(10);
    for jobs in [1usize, 0] {
        let name = if jobs == 1 { "jobs_1" } else { "jobs_auto" };
        group.bench_function(name, |b| {
            b.iter(|| {
                let dir = tempfile::tempdir().unwrap();
                run_benchmark(
                    black_box(&config),
                    dir.path(),
                    &RunOptions {
                        jobs,
                        per_edge: false,
                    },
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_horizons, bench_neighborhood, bench_grid);
criterion_main!(benches);
