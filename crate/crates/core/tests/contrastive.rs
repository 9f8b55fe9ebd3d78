use degradekit::contrastive::{
    batch_features, build_training_batch, nt_xent_multiscale, retrieval_accuracy, train_projector,
    write_embeddings_csv, Scale, Source, TrainConfig, FEATURE_DIM,
};
use degradekit::corpus::procedural_corpus;
use degradekit::degradation::{sample_degradation, DegradeConfig};
use degradekit::distortions::{Distorter, DistortionKind};
use degradekit::rng::rng_from_seed;

fn batches(count: usize, pairs: usize, seed: u64) -> Vec<degradekit::TrainingBatch> {
    let corpus = procedural_corpus(2 * pairs * count, 80, 72, seed);
    let d = Distorter::default();
    let mut cfg = DegradeConfig::default();
    cfg.excluded_kinds.insert(DistortionKind::Jpeg2000);
    let mut rng = rng_from_seed(seed);
    corpus
        .chunks(2 * pairs)
        .map(|chunk| {
            let images: Vec<_> = chunk.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
            let degs: Vec<_> = (0..pairs).map(|_| sample_degradation(&cfg, &mut rng).unwrap()).collect();
            build_training_batch(&images, &degs, 32, &d, &mut rng).unwrap()
        })
        .collect()
}

#[test]
fn batch_to_features_to_loss() {
    let b = batches(1, 5, 1);
    assert_eq!(b[0].len(), 20);
    for i in 0..5 {
        assert_eq!(b[0].view(Source::First, Scale::Full, i).dims(), (32, 32));
        assert_eq!(b[0].view(Source::Second, Scale::Half, i).dims(), (32, 32));
    }
    let feats = batch_features(&b).unwrap();
    assert_eq!(feats[0].dim(), FEATURE_DIM);
    let (loss, terms) = nt_xent_multiscale(&feats[0], 0.1).unwrap();
    assert!(loss.is_finite() && loss > 0.0);
    assert_eq!(terms.len(), 20);
    let rows: Vec<&[f64]> = feats[0].rows().collect();
    let acc = retrieval_accuracy(&rows, &feats[0].labels()).unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn training_and_dump_are_deterministic() {
    let b = batches(3, 4, 2);
    let cfg = TrainConfig { epochs: 5, ..TrainConfig::default() };
    let (p1, t1) = train_projector(&b, &cfg, &mut rng_from_seed(0)).unwrap();
    let (p2, t2) = train_projector(&b, &cfg, &mut rng_from_seed(0)).unwrap();
    assert_eq!(t1, t2);
    assert_eq!(p1, p2);

    let feats = batch_features(&b).unwrap();
    let emb: Vec<_> = feats.iter().map(|f| p1.project(f).unwrap()).collect();
    let mut out = Vec::new();
    write_embeddings_csv(&mut out, &emb).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("view_id,source,scale,pair_index,composition_id,f0"));
    assert_eq!(header.split(',').count(), 5 + cfg.output_dim);
    assert_eq!(lines.count(), 3 * 16);
}
