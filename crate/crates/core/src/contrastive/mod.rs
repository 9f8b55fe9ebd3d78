//! Two-source, two-scale contrastive training on distortion compositions.
//!
//! A batch holds `B` pairs of pristine images. Each pair gets one sampled
//! degradation, applied to a crop of each image at full and half scale, which
//! yields `4B` views. Views of the same pair from different sources are
//! positives; everything else, including the other scale of the same image, is
//! a negative.

mod batch;
mod demo;
mod dump;
mod features;
mod loss;
mod projector;
mod retrieval;

pub use batch::{build_training_batch, TrainingBatch, View};
pub use demo::{run_demo, DemoConfig, DemoReport};
pub use dump::write_embeddings_csv;
pub use features::{handcrafted_features, FEATURE_DIM, MIN_PATCH};
pub use loss::{cosine_similarity, nt_xent_gradient, nt_xent_multiscale, nt_xent_with_gradient};
pub use projector::{batch_features, train_projector, train_projector_on_features, Projector, TrainConfig};
pub use retrieval::retrieval_accuracy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    First,
    Second,
}

impl Source {
    pub fn number(self) -> u8 {
        match self {
            Source::First => 1,
            Source::Second => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Full,
    Half,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Full => "full",
            Scale::Half => "half",
        }
    }
}

/// View blocks in storage order. View `(block, i)` lives at row `block * B + i`.
pub const BLOCKS: [(Source, Scale); 4] = [
    (Source::First, Scale::Full),
    (Source::Second, Scale::Full),
    (Source::First, Scale::Half),
    (Source::Second, Scale::Half),
];

/// Row index of view `(source, scale, i)` in a batch of `pairs` pairs.
pub fn view_index(pairs: usize, source: Source, scale: Scale, i: usize) -> usize {
    let block = BLOCKS.iter().position(|&b| b == (source, scale)).expect("all combinations listed");
    block * pairs + i
}

/// Row index of the positive partner of row `a`.
#[inline]
pub fn positive_of(pairs: usize, a: usize) -> usize {
    let (block, i) = (a / pairs, a % pairs);
    (block ^ 1) * pairs + i
}

/// `4B` embeddings of dimension `dim`, stored row-major in block order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingBatch {
    pairs: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingBatch {
    pub fn new(pairs: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if pairs == 0 || dim == 0 {
            return Err(Error::invalid("embedding batch needs at least one pair and one dimension"));
        }
        if values.len() != 4 * pairs * dim {
            return Err(Error::invalid(format!(
                "expected {} values for {pairs} pairs of dim {dim}, got {}",
                4 * pairs * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding values must be finite"));
        }
        Ok(Self { pairs, dim, values })
    }

    pub fn from_rows(pairs: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("embedding rows have mixed dimensions"));
        }
        Self::new(pairs, dim, rows.concat())
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        4 * self.pairs
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Pair index of each row, used as the retrieval label.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|v| v % self.pairs).collect()
    }
}
