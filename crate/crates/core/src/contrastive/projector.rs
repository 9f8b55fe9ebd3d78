//! Two-layer projector `z = W2 relu(W1 x + b1) + b2` over standardized features.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::handcrafted_features;
use super::loss::nt_xent_with_gradient;
use super::{EmbeddingBatch, TrainingBatch};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projector {
    input_dim: usize,
    hidden: usize,
    output_dim: usize,
    mean: Vec<f64>,
    inv_std: Vec<f64>,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

struct Grads {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Projector {
    /// He-initialized weights; the output bias gets small random values so a
    /// fully inactive hidden layer never yields a zero embedding.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: usize, output_dim: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || hidden == 0 || output_dim == 0 {
            return Err(Error::invalid("projector dimensions must be positive"));
        }
        let mut normal =
            |n: usize, std: f64| -> Vec<f64> { (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect() };
        let w1 = normal(hidden * input_dim, (2.0 / input_dim as f64).sqrt());
        let w2 = normal(output_dim * hidden, (2.0 / hidden as f64).sqrt());
        let b2 = normal(output_dim, 0.01);
        Ok(Self {
            input_dim,
            hidden,
            output_dim,
            mean: vec![0.0; input_dim],
            inv_std: vec![1.0; input_dim],
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Sets the per-feature standardization from a sample of raw feature rows.
    pub fn fit_standardization<'a>(&mut self, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        let mut n = 0usize;
        let mut sum = vec![0.0; self.input_dim];
        let mut sq = vec![0.0; self.input_dim];
        for r in rows {
            if r.len() != self.input_dim {
                return Err(Error::invalid("feature row has the wrong dimension"));
            }
            n += 1;
            for k in 0..self.input_dim {
                sum[k] += r[k];
                sq[k] += r[k] * r[k];
            }
        }
        if n == 0 {
            return Err(Error::invalid("standardization needs at least one row"));
        }
        for k in 0..self.input_dim {
            let m = sum[k] / n as f64;
            let var = (sq[k] / n as f64 - m * m).max(0.0);
            self.mean[k] = m;
            self.inv_std[k] = if var > 1e-12 { 1.0 / var.sqrt() } else { 1.0 };
        }
        Ok(())
    }

    fn hidden_pre(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..self.input_dim).map(|k| (x[k] - self.mean[k]) * self.inv_std[k]).collect();
        let pre = (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
                self.b1[j] + row.iter().zip(&xs).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        (xs, pre)
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        (0..self.output_dim)
            .map(|o| {
                let row = &self.w2[o * self.hidden..(o + 1) * self.hidden];
                self.b2[o] + row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let (_, pre) = self.hidden_pre(x);
        let h: Vec<f64> = pre.iter().map(|&a| a.max(0.0)).collect();
        self.output(&h)
    }

    /// Projects every row of a raw feature batch.
    pub fn project(&self, features: &EmbeddingBatch) -> Result<EmbeddingBatch> {
        if features.dim() != self.input_dim {
            return Err(Error::invalid(format!("projector expects dim {}, got {}", self.input_dim, features.dim())));
        }
        let values = features.rows().flat_map(|r| self.forward(r)).collect();
        EmbeddingBatch::new(features.pairs(), self.output_dim, values)
    }

    /// Loss on one feature batch and the parameter gradient.
    fn loss_and_grads(&self, features: &EmbeddingBatch, tau: f64) -> Result<(f64, Grads)> {
        let caches: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = features
            .rows()
            .map(|r| {
                let (xs, pre) = self.hidden_pre(r);
                let h: Vec<f64> = pre.iter().map(|&a| a.max(0.0)).collect();
                (xs, pre, h)
            })
            .collect();
        let z: Vec<f64> = caches.iter().flat_map(|(_, _, h)| self.output(h)).collect();
        let emb = EmbeddingBatch::new(features.pairs(), self.output_dim, z)?;
        let (loss, dz) = nt_xent_with_gradient(&emb, tau)?;

        let mut g = Grads {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.output_dim],
        };
        let mut dh = vec![0.0; self.hidden];
        for (v, (xs, pre, h)) in caches.iter().enumerate() {
            let dzv = &dz[v * self.output_dim..(v + 1) * self.output_dim];
            dh.fill(0.0);
            for (o, &d) in dzv.iter().enumerate() {
                g.b2[o] += d;
                let row = o * self.hidden;
                for j in 0..self.hidden {
                    g.w2[row + j] += d * h[j];
                    dh[j] += d * self.w2[row + j];
                }
            }
            for j in 0..self.hidden {
                if pre[j] <= 0.0 {
                    continue;
                }
                let d = dh[j];
                g.b1[j] += d;
                let row = j * self.input_dim;
                for (k, x) in xs.iter().enumerate() {
                    g.w1[row + k] += d * x;
                }
            }
        }
        Ok((loss, g))
    }

    fn step(&mut self, g: &Grads, lr: f64) {
        let upd = |p: &mut [f64], d: &[f64]| p.iter_mut().zip(d).for_each(|(p, d)| *p -= lr * d);
        upd(&mut self.w1, &g.w1);
        upd(&mut self.b1, &g.b1);
        upd(&mut self.w2, &g.w2);
        upd(&mut self.b2, &g.b2);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub tau: f64,
    pub hidden: usize,
    pub output_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 30, lr: 0.5, tau: 0.1, hidden: 32, output_dim: 16 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be non-negative, got {}", self.lr)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("temperature must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// Extracts handcrafted features for every view of every batch.
pub fn batch_features(batches: &[TrainingBatch]) -> Result<Vec<EmbeddingBatch>> {
    batches
        .iter()
        .map(|b| {
            let rows = b.patches().par_iter().map(handcrafted_features).collect::<Result<Vec<_>>>()?;
            EmbeddingBatch::from_rows(b.pairs(), &rows)
        })
        .collect()
}

/// Plain gradient descent, one step per batch, batches visited in order.
/// Returns the projector and the mean pre-step loss of every epoch.
pub fn train_projector_on_features<R: Rng + ?Sized>(
    batches: &[EmbeddingBatch],
    config: &TrainConfig,
    rng: &mut R,
) -> Result<(Projector, Vec<f64>)> {
    config.validate()?;
    if batches.len() < 2 {
        return Err(Error::invalid(format!("training needs at least 2 batches, got {}", batches.len())));
    }
    let dim = batches[0].dim();
    if batches.iter().any(|b| b.dim() != dim) {
        return Err(Error::invalid("feature batches have mixed dimensions"));
    }
    let mut proj = Projector::new(dim, config.hidden, config.output_dim, rng)?;
    proj.fit_standardization(batches.iter().flat_map(|b| b.rows()))?;
    let mut trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let mut total = 0.0;
        for b in batches {
            let (loss, g) = proj.loss_and_grads(b, config.tau)?;
            total += loss;
            proj.step(&g, config.lr);
        }
        trace.push(total / batches.len() as f64);
    }
    Ok((proj, trace))
}

pub fn train_projector<R: Rng + ?Sized>(
    batches: &[TrainingBatch],
    config: &TrainConfig,
    rng: &mut R,
) -> Result<(Projector, Vec<f64>)> {
    train_projector_on_features(&batch_features(batches)?, config, rng)
}
