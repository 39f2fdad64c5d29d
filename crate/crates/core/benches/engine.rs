use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use diagsre::diagnostics::{first_passage, FirstPassageConfig};
use diagsre::engine::TrajectoryStream;
use diagsre::exec::Execution;
use diagsre::study::figure_model;
use diagsre::vsrv::ExceedanceSink;
use std::hint::black_box;

const STEPS: u64 = 2_000_000;
const CHUNK: u64 = 1 << 18;

fn policies() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel { workers: 0 }),
    ]
}

fn bench_simulate(c: &mut Criterion) {
    let sim = figure_model(1).unwrap();
    let model = sim.diagonal().unwrap();
    let alpha = sim.profile().unwrap().alpha;
    let mut group = c.benchmark_group("simulate_fig1");
    group.sample_size(10).throughput(Throughput::Elements(STEPS));
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut sink = ExceedanceSink::new(alpha.clone(), 1.0 - 1e-4, 0, STEPS).unwrap();
                TrajectoryStream::new(&model, 1, STEPS)
                    .chunk_size(CHUNK)
                    .simulate(&mut sink, exec)
                    .unwrap();
                black_box(sink.finish().unwrap().threshold)
            })
        });
    }
    group.finish();
}

fn bench_replicas(c: &mut Criterion) {
    let sim = figure_model(1).unwrap();
    let model = sim.diagonal().unwrap();
    let profile = sim.profile().unwrap();
    let config = FirstPassageConfig {
        u_grid: vec![1e4],
        replicas: 2000,
        ..FirstPassageConfig::default()
    };
    let mut group = c.benchmark_group("first_passage_fig1");
    group
        .sample_size(10)
        .throughput(Throughput::Elements(config.replicas as u64));
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let stats = first_passage(&model.factor(1), profile.alpha[1], &model.q_marginal(1), &config, exec);
                black_box(stats.unwrap()[0].window_violation_rate)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_replicas);
criterion_main!(benches);
