//! Sequential versus data-parallel execution of the batched workloads:
//! gradient accumulation, shot-noise trials and schedule compilation.
//! Build with `--no-default-features` to see the fallback (both modes then
//! run sequentially).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use perthro::circuit::{Circuit, Head};
use perthro::pulse::{CalibrationResult, ExcitationModel, GaussianPulse};
use perthro::rng::seeded;
use perthro::schedule::compile_batch;
use perthro::training::{batch_gradient, shot_trials, LossKind};
use perthro::{Dataset, Execution};
use rand::Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn synthetic_classification(n: usize) -> Dataset {
    let mut rng = seeded(1);
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let targets = labels
        .iter()
        .map(|&l| (0..3).map(|k| if k == l { 1.0 } else { 0.0 }).collect())
        .collect();
    Dataset {
        features,
        targets,
        labels: Some(labels),
        class_names: vec!["a".into(), "b".into(), "c".into()],
        feature_names: (0..4).map(|k| format!("f{k}")).collect(),
        feature_scaling: None,
        target_scaling: None,
    }
}

fn circuit() -> Circuit {
    Circuit::random(4, &[6, 12, 3], Head::Softmax { num_classes: 3 }, 0.5, &mut seeded(2)).unwrap()
}

fn gradients(c: &mut Criterion) {
    let net = circuit();
    let mut group = c.benchmark_group("batch_gradient");
    for n in [32usize, 512, 4096] {
        let data = synthetic_classification(n);
        let idx: Vec<usize> = (0..n).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &idx, |b, idx| {
                b.iter(|| batch_gradient(&net, &data, black_box(idx), LossKind::CategoricalCrossEntropy, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn shots(c: &mut Criterion) {
    let net = circuit();
    let data = synthetic_classification(30);
    let mut group = c.benchmark_group("shot_trials");
    group.sample_size(20);
    for trials in [64usize, 1024] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, trials), &trials, |b, &t| {
                b.iter(|| shot_trials(&net, &data, 1024, t, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn schedules(c: &mut Criterion) {
    let net = circuit();
    let data = synthetic_classification(1024);
    let cal = CalibrationResult {
        resonant_frequency_hz: Some(4.97e9),
        pi_amplitude: 1.0,
        fit: ExcitationModel::default(),
        residual: 0.0,
    };
    let template = GaussianPulse::default();
    let mut group = c.benchmark_group("compile_batch");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| compile_batch(&net, black_box(&data.features), Some(&cal), &template, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gradients, shots, schedules);
criterion_main!(benches);
