use std::hint::black_box;

use argpp_core::embed::pca_fit;
use argpp_core::eval::{approx_randomization, fisher_average, kfold, pearson_r};
use argpp_core::models::{cross_validate, CvProtocol, FeatureGroup, PrecomputedFeatures, RegressorKind};
use argpp_core::rng::seeded;
use argpp_core::{FeatureVector, Matrix, RegressorConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng as _;

fn bench_metrics(c: &mut Criterion) {
    let mut rng = seeded(1);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x + rng.random_range(-0.5..0.5)).collect();
    c.bench_function("pearson_r_10k", |b| b.iter(|| black_box(pearson_r(&xs, &ys).unwrap())));
    let rs: Vec<f64> = (0..10).map(|i| 0.5 + i as f64 * 0.04).collect();
    c.bench_function("fisher_average_10", |b| b.iter(|| black_box(fisher_average(&rs).unwrap())));
    c.bench_function("kfold_305", |b| b.iter(|| black_box(kfold(305, 10, 7).unwrap())));
}

fn bench_significance(c: &mut Criterion) {
    let mut g = c.benchmark_group("approx_randomization");
    let mut rng = seeded(2);
    for n in [100, 4064] {
        let a: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.9))).collect();
        let bsys: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.88))).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| black_box(approx_randomization(&a, &bsys, 1000, 3).unwrap()))
        });
    }
    g.finish();
}

fn bench_pca(c: &mut Criterion) {
    let mut rng = seeded(4);
    let data: Vec<f64> = (0..200 * 300).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Matrix::from_vec(200, 300, data).unwrap();
    c.bench_function("pca_fit_200x300_k5", |b| b.iter(|| black_box(pca_fit(&x, 5).unwrap())));
}

fn bench_cv(c: &mut Criterion) {
    let mut rng = seeded(5);
    let schema = vec![FeatureGroup { name: "x".into(), len: 15 }];
    let xs: Vec<FeatureVector> = (0..305)
        .map(|_| FeatureVector {
            values: (0..15).map(|_| rng.random_range(-1.0..1.0)).collect(),
            schema: schema.clone(),
        })
        .collect();
    let ys = xs.iter().map(|x| x.values[0] - 0.5 * x.values[3] * x.values[7]).collect();
    let src = PrecomputedFeatures { xs, ys };
    let mut g = c.benchmark_group("cross_validate");
    g.sample_size(10);
    for kind in [RegressorKind::Linear, RegressorKind::Mlp] {
        let config = RegressorConfig {
            max_epochs: 20,
            ..RegressorConfig::default()
        };
        g.bench_function(kind.to_string(), |b| {
            b.iter(|| black_box(cross_validate(&src, kind, &config, None, &CvProtocol::default()).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_metrics, bench_significance, bench_pca, bench_cv);
criterion_main!(benches);
