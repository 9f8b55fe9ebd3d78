use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use degradekit::contrastive::{handcrafted_features, nt_xent_with_gradient, EmbeddingBatch};
use degradekit::corpus::procedural_image;
use degradekit::degradation::{count_compositions, CountMode};
use degradekit::rng::rng_from_seed;
use rand::Rng;

fn loss(c: &mut Criterion) {
    let mut rng = rng_from_seed(3);
    let (pairs, dim) = (16, 128);
    let values: Vec<f64> = (0..4 * pairs * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let batch = EmbeddingBatch::new(pairs, dim, values).unwrap();
    c.bench_function("nt_xent_with_gradient_b16_d128", |b| {
        b.iter(|| black_box(nt_xent_with_gradient(black_box(&batch), 0.1).unwrap()))
    });
}

fn features(c: &mut Criterion) {
    let patch = procedural_image(224, 224, 4);
    c.bench_function("handcrafted_features_224", |b| {
        b.iter(|| black_box(handcrafted_features(black_box(&patch)).unwrap()))
    });
}

fn count(c: &mut Criterion) {
    let sizes = [3, 3, 5, 4, 4, 2, 3];
    for mode in [CountMode::Literal, CountMode::DistinctGroups] {
        c.bench_function(&format!("count_compositions_{mode:?}"), |b| {
            b.iter(|| black_box(count_compositions(black_box(&sizes), 5, 4, mode).unwrap()))
        });
    }
}

criterion_group!(benches, loss, features, count);
criterion_main!(benches);
