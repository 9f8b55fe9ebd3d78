//! End-to-end desk-scale run: build batches from a corpus, train the projector
//! and compare held-out retrieval before and after training.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::batch::{build_training_batch, TrainingBatch};
use super::projector::{batch_features, train_projector_on_features, Projector, TrainConfig};
use super::retrieval::retrieval_accuracy;
use super::EmbeddingBatch;
use crate::degradation::{sample_degradation, DegradeConfig};
use crate::distortions::Distorter;
use crate::error::{Error, Result};
use crate::imgproc::ImageBuffer;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub batch: usize,
    pub patch: usize,
    pub train_batches: usize,
    pub heldout_batches: usize,
    pub holdout_fraction: f64,
    pub train: TrainConfig,
    pub degrade: DegradeConfig,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            batch: 16,
            patch: 224,
            train_batches: 10,
            heldout_batches: 5,
            holdout_fraction: 0.2,
            train: TrainConfig::default(),
            degrade: DegradeConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub loss_trace: Vec<f64>,
    pub chance: f64,
    pub untrained_retrieval: f64,
    pub trained_retrieval: Option<f64>,
    #[serde(skip)]
    pub heldout_embeddings: Vec<EmbeddingBatch>,
    #[serde(skip)]
    pub projector: Option<Projector>,
}

fn make_batches(
    pool: &[ImageBuffer],
    count: usize,
    config: &DemoConfig,
    distorter: &Distorter,
    stream: u64,
) -> Result<Vec<TrainingBatch>> {
    (0..count)
        .map(|k| {
            let mut rng = rng_from_seed(derive_seed(config.seed, stream * 1_000_003 + k as u64));
            let picks = index::sample(&mut rng, pool.len(), 2 * config.batch);
            let pairs: Vec<(ImageBuffer, ImageBuffer)> = (0..config.batch)
                .map(|i| (pool[picks.index(2 * i)].clone(), pool[picks.index(2 * i + 1)].clone()))
                .collect();
            let degs =
                (0..config.batch).map(|_| sample_degradation(&config.degrade, &mut rng)).collect::<Result<Vec<_>>>()?;
            build_training_batch(&pairs, &degs, config.patch, distorter, &mut rng)
        })
        .collect()
}

fn mean_retrieval(batches: &[EmbeddingBatch]) -> Result<f64> {
    let mut total = 0.0;
    for b in batches {
        let rows: Vec<&[f64]> = b.rows().collect();
        total += retrieval_accuracy(&rows, &b.labels())?;
    }
    Ok(total / batches.len() as f64)
}

/// Splits `images` into a training pool and a held-out pool, trains on batches
/// from the first and measures retrieval on batches from the second. With
/// `train.epochs == 0` only the untrained baseline is reported.
pub fn run_demo(images: &[ImageBuffer], config: &DemoConfig, distorter: &Distorter) -> Result<DemoReport> {
    if config.batch < 2 {
        return Err(Error::invalid("demo batch size must be at least 2"));
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(Error::invalid("holdout fraction must be in [0, 1)"));
    }
    let n_hold = (images.len() as f64 * config.holdout_fraction).round() as usize;
    let (train_pool, hold_pool) = images.split_at(images.len() - n_hold);
    for (name, pool) in [("training", train_pool), ("held-out", hold_pool)] {
        if pool.len() < 2 * config.batch {
            return Err(Error::invalid(format!(
                "{name} pool has {} images; a batch of {} pairs needs {}",
                pool.len(),
                config.batch,
                2 * config.batch
            )));
        }
    }
    let held = batch_features(&make_batches(hold_pool, config.heldout_batches, config, distorter, 2)?)?;
    let chance = 3.0 / (4 * config.batch - 1) as f64;

    let mut init_rng = rng_from_seed(derive_seed(config.seed, 7));
    let train_feats = if config.train.epochs > 0 {
        batch_features(&make_batches(train_pool, config.train_batches, config, distorter, 1)?)?
    } else {
        Vec::new()
    };

    // Untrained baseline: same initialization and standardization as training.
    let mut untrained =
        Projector::new(held[0].dim(), config.train.hidden, config.train.output_dim, &mut init_rng.clone())?;
    let stats_source = if train_feats.is_empty() { &held } else { &train_feats };
    untrained.fit_standardization(stats_source.iter().flat_map(|b| b.rows()))?;
    let base_emb = held.iter().map(|b| untrained.project(b)).collect::<Result<Vec<_>>>()?;
    let untrained_retrieval = mean_retrieval(&base_emb)?;

    if config.train.epochs == 0 {
        return Ok(DemoReport {
            loss_trace: Vec::new(),
            chance,
            untrained_retrieval,
            trained_retrieval: None,
            heldout_embeddings: base_emb,
            projector: Some(untrained),
        });
    }
    let (proj, trace) = train_projector_on_features(&train_feats, &config.train, &mut init_rng)?;
    let emb = held.iter().map(|b| proj.project(b)).collect::<Result<Vec<_>>>()?;
    Ok(DemoReport {
        loss_trace: trace,
        chance,
        untrained_retrieval,
        trained_retrieval: Some(mean_retrieval(&emb)?),
        heldout_embeddings: emb,
        projector: Some(proj),
    })
}
