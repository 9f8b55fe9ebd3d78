//! Linear quality regression on frozen embeddings and its evaluation protocol.

mod crops;
mod dataset;
mod gmad;
mod metrics;
mod protocol;
mod ridge;

pub use crops::{five_crop_features, five_crop_score, fr_features};
pub use dataset::{split_by_reference, FeatureTable, MosDataset, MosRow, SplitRatios};
pub use gmad::{gmad_bins, gmad_pairs, GmadPair};
pub use metrics::{plcc, rank_average, srcc};
pub use protocol::{
    alpha_sweep, cross_dataset, default_alphas, evaluate_protocol, fit_model, median, predict_rows, row_features,
    AlphaEntry, AlphaSweep, CrossReport, EvalSplit, FeatureMode, ProtocolOptions, ProtocolReport, RepeatResult,
};
pub use ridge::{ridge_fit, RegressorModel};
