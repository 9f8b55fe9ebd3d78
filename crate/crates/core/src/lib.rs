//! Synthetic image degradation, contrastive distortion-manifold objectives and
//! quality-regression evaluation.
//!
//! The crate is organised bottom-up:
//!
//! - [`imgproc`]: colour spaces, resampling, convolution, crops and PSNR.
//! - [`distortions`]: 24 distortion kernels in 7 groups with 5-level severity ladders.
//! - [`degradation`]: random ordered compositions, pristine gating and composition counting.
//! - [`contrastive`]: two-source, two-scale training batches and the contrastive loss with
//!   analytic gradients, plus a small handcrafted encoder and trainable projector.
//! - [`quality`]: ridge regression, rank/linear correlation, reference-disjoint splits,
//!   five-crop scoring, full-reference features and gMAD pair search.

pub mod contrastive;
pub mod corpus;
pub mod degradation;
pub mod distortions;
pub mod error;
pub mod imgproc;
pub mod quality;
pub mod rng;

pub use contrastive::{EmbeddingBatch, Projector, Scale, Source, TrainingBatch};
pub use degradation::{Composition, Degradation, DegradeConfig, Step};
pub use distortions::{Distorter, DistortionGroup, DistortionKind, Level};
pub use error::{Error, Result};
pub use imgproc::{ImageBuffer, Rect};
pub use quality::{MosDataset, RegressorModel};
pub use rng::DetRng;
