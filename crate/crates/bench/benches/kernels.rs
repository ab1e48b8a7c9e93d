use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use leafclass::metrics::{micro_aggregate, render_class_table, ClassRow};
use leafclass::nn::layers::conv2d_forward;
use leafclass::nn::{loss_and_gradients, sgd_step};
use leafclass::preprocess::{median_filter, preprocess_pipeline, PreprocessConfig};
use leafclass::{class_metrics, init_parameters, one_vs_rest, ModelConfig};
use leafclass_bench::{confusion, image, samples, tensor, values};

fn conv(c: &mut Criterion) {
    let input = tensor(32, 32, 8);
    let weights = values(3 * 3 * 8 * 16, 2);
    let bias = values(16, 3);
    c.bench_function("conv2d_forward 32x32x8 -> 16, k3", |b| {
        b.iter(|| conv2d_forward(black_box(&input), &weights, &bias, 1, 1).unwrap())
    });
}

fn preprocess(c: &mut Criterion) {
    let img = image(224);
    c.bench_function("median_filter 224x224 k3", |b| {
        b.iter(|| median_filter(black_box(&img), 3).unwrap())
    });
    let cfg = PreprocessConfig {
        target_height: 64,
        target_width: 64,
        ..Default::default()
    };
    c.bench_function("preprocess_pipeline 224 -> 64", |b| {
        b.iter(|| preprocess_pipeline(black_box(&img), &cfg).unwrap())
    });
}

fn train_step(c: &mut Criterion) {
    let model = ModelConfig::mini_vgg(32, 32, 5);
    let batch = samples(32, 32, 5);
    let initial = init_parameters(&model, 1).unwrap();
    c.bench_function("train step mini_vgg 32x32, batch 32", |b| {
        b.iter_batched(
            || {
                let velocity: Vec<Vec<f64>> = initial
                    .parameters
                    .iter()
                    .map(|p| vec![0.0; p.len()])
                    .collect();
                (initial.clone(), velocity)
            },
            |(mut ck, mut velocity)| {
                let mut sum: Vec<Vec<f64>> =
                    ck.parameters.iter().map(|p| vec![0.0; p.len()]).collect();
                for s in &batch {
                    let (_, g) = loss_and_gradients(&ck, &s.input, s.label).unwrap();
                    for (acc, layer) in sum.iter_mut().zip(g) {
                        acc.iter_mut()
                            .zip(layer)
                            .for_each(|(a, x)| *a += x / batch.len() as f64);
                    }
                }
                for ((p, g), v) in ck.parameters.iter_mut().zip(&sum).zip(&mut velocity) {
                    sgd_step(p, g, v, 0.01, 0.9).unwrap();
                }
                ck
            },
            BatchSize::LargeInput,
        )
    });
}

fn metrics(c: &mut Criterion) {
    let m = confusion(5);
    c.bench_function("metrics 5-class table + summary", |b| {
        b.iter(|| {
            let rows: Vec<ClassRow> = (0..m.k())
                .map(|k| {
                    let counts = one_vs_rest(black_box(&m), k).unwrap();
                    ClassRow {
                        name: format!("c{k}"),
                        counts,
                        metrics: class_metrics(&counts).unwrap(),
                    }
                })
                .collect();
            (render_class_table(&rows), micro_aggregate(&m).unwrap())
        })
    });
}

criterion_group!(benches, conv, preprocess, train_step, metrics);
criterion_main!(benches);
