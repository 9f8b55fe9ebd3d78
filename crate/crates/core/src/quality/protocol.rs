use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crops::fr_features;
use super::dataset::{split_by_reference, FeatureTable, MosDataset, MosRow, SplitRatios};
use super::metrics::{plcc, srcc};
use super::ridge::{ridge_fit, RegressorModel};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Features are the image's own embedding.
    #[default]
    NoReference,
    /// Features are `|h_ref - h_dist|` against the row's reference image.
    FullReference,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    Validation,
    #[default]
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolOptions {
    pub alpha: f64,
    pub repeats: usize,
    pub seed: u64,
    pub ratios: SplitRatios,
    pub mode: FeatureMode,
    pub eval_split: EvalSplit,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            repeats: 10,
            seed: 0,
            ratios: SplitRatios::default(),
            mode: FeatureMode::NoReference,
            eval_split: EvalSplit::Test,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub seed: u64,
    pub srcc: f64,
    pub plcc: f64,
    pub train_rows: usize,
    pub val_rows: usize,
    pub test_rows: usize,
    pub train_refs: usize,
    pub val_refs: usize,
    pub test_refs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub median_srcc: f64,
    pub median_plcc: f64,
    pub alpha: f64,
    pub mode: FeatureMode,
    pub eval_split: EvalSplit,
    pub per_repeat: Vec<RepeatResult>,
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty list");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Feature rows (one per crop) for a dataset row.
pub fn row_features(row: &MosRow, table: &FeatureTable, mode: FeatureMode) -> Result<Vec<Vec<f64>>> {
    let dist = table.get(&row.image_path)?;
    match mode {
        FeatureMode::NoReference => Ok(dist.to_vec()),
        FeatureMode::FullReference => {
            let ref_path = row
                .reference_path
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("row `{}` has no reference_path", row.image_path)))?;
            let reference = table.get(ref_path)?;
            if reference.len() != dist.len() {
                return Err(Error::invalid(format!(
                    "`{}` has {} crops but its reference has {}",
                    row.image_path,
                    dist.len(),
                    reference.len()
                )));
            }
            reference.iter().zip(dist).map(|(r, d)| fr_features(r, d)).collect()
        }
    }
}

fn mean_row(crops: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; crops[0].len()];
    for c in crops {
        m.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    m.iter_mut().for_each(|a| *a /= crops.len() as f64);
    m
}

/// Fits on the crop-averaged features of every row.
pub fn fit_model(ds: &MosDataset, table: &FeatureTable, alpha: f64, mode: FeatureMode) -> Result<RegressorModel> {
    let x = ds.rows.iter().map(|r| row_features(r, table, mode).map(|c| mean_row(&c))).collect::<Result<Vec<_>>>()?;
    ridge_fit(&x, &ds.mos(), alpha)
}

/// Mean crop prediction for every row.
pub fn predict_rows(
    ds: &MosDataset,
    table: &FeatureTable,
    model: &RegressorModel,
    mode: FeatureMode,
) -> Result<Vec<f64>> {
    ds.rows
        .iter()
        .map(|r| {
            let crops = row_features(r, table, mode)?;
            Ok(crops.iter().map(|c| model.predict(c)).sum::<f64>() / crops.len() as f64)
        })
        .collect()
}

fn one_repeat(ds: &MosDataset, table: &FeatureTable, opts: &ProtocolOptions, repeat: usize) -> Result<RepeatResult> {
    let seed = derive_seed(opts.seed, repeat as u64);
    let (train, val, test) = split_by_reference(ds, opts.ratios, seed)?;
    let (a, b, c) = (train.reference_ids(), val.reference_ids(), test.reference_ids());
    if !(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c)) {
        return Err(Error::invalid("split leaked a reference id across partitions"));
    }
    let model = fit_model(&train, table, opts.alpha, opts.mode)?;
    let (eval, name) = match opts.eval_split {
        EvalSplit::Validation => (&val, "validation"),
        EvalSplit::Test => (&test, "test"),
    };
    if eval.len() < 2 {
        return Err(Error::invalid(format!("{name} split has {} rows; add references or raise its ratio", eval.len())));
    }
    let pred = predict_rows(eval, table, &model, opts.mode)?;
    let mos = eval.mos();
    Ok(RepeatResult {
        repeat,
        seed,
        srcc: srcc(&pred, &mos)?,
        plcc: plcc(&pred, &mos)?,
        train_rows: train.len(),
        val_rows: val.len(),
        test_rows: test.len(),
        train_refs: a.len(),
        val_refs: b.len(),
        test_refs: c.len(),
    })
}

/// Repeats split, fit and score `opts.repeats` times with derived seeds and
/// reports the medians.
pub fn evaluate_protocol(ds: &MosDataset, table: &FeatureTable, opts: &ProtocolOptions) -> Result<ProtocolReport> {
    if opts.repeats == 0 {
        return Err(Error::invalid("at least one repeat is required"));
    }
    let per_repeat =
        (0..opts.repeats).into_par_iter().map(|r| one_repeat(ds, table, opts, r)).collect::<Result<Vec<_>>>()?;
    let s: Vec<f64> = per_repeat.iter().map(|r| r.srcc).collect();
    let p: Vec<f64> = per_repeat.iter().map(|r| r.plcc).collect();
    Ok(ProtocolReport {
        median_srcc: median(&s),
        median_plcc: median(&p),
        alpha: opts.alpha,
        mode: opts.mode,
        eval_split: opts.eval_split,
        per_repeat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub alpha: f64,
    pub median_srcc: f64,
    pub median_plcc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub entries: Vec<AlphaEntry>,
    pub best_alpha: f64,
    pub worst_alpha: f64,
    /// Best minus worst median SRCC.
    pub delta: f64,
}

/// Decade grid `1e-3 ..= 1e3`.
pub fn default_alphas() -> Vec<f64> {
    (-3..=3).map(|e| 10f64.powi(e)).collect()
}

/// Runs the protocol on the validation split for every alpha.
pub fn alpha_sweep(
    ds: &MosDataset,
    table: &FeatureTable,
    base: &ProtocolOptions,
    alphas: &[f64],
) -> Result<AlphaSweep> {
    if alphas.is_empty() {
        return Err(Error::invalid("alpha sweep needs at least one value"));
    }
    let entries = alphas
        .iter()
        .map(|&alpha| {
            let opts = ProtocolOptions { alpha, eval_split: EvalSplit::Validation, ..base.clone() };
            evaluate_protocol(ds, table, &opts).map(|r| AlphaEntry {
                alpha,
                median_srcc: r.median_srcc,
                median_plcc: r.median_plcc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = entries.iter().max_by(|a, b| a.median_srcc.total_cmp(&b.median_srcc)).expect("non-empty");
    let worst = entries.iter().min_by(|a, b| a.median_srcc.total_cmp(&b.median_srcc)).expect("non-empty");
    Ok(AlphaSweep {
        best_alpha: best.alpha,
        worst_alpha: worst.alpha,
        delta: best.median_srcc - worst.median_srcc,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub srcc: f64,
    pub plcc: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub overlapping_paths: usize,
}

/// Trains on all of `train` and scores all of `test`. The two datasets must not
/// share image paths.
pub fn cross_dataset(
    train: &MosDataset,
    test: &MosDataset,
    table: &FeatureTable,
    alpha: f64,
    mode: FeatureMode,
) -> Result<CrossReport> {
    let a: BTreeSet<&str> = train.rows.iter().map(|r| r.image_path.as_str()).collect();
    let overlap = test.rows.iter().filter(|r| a.contains(r.image_path.as_str())).count();
    if overlap > 0 {
        return Err(Error::invalid(format!("{overlap} image paths appear in both datasets")));
    }
    let model = fit_model(train, table, alpha, mode)?;
    let pred = predict_rows(test, table, &model, mode)?;
    let mos = test.mos();
    Ok(CrossReport {
        srcc: srcc(&pred, &mos)?,
        plcc: plcc(&pred, &mos)?,
        train_rows: train.len(),
        test_rows: test.len(),
        overlapping_paths: overlap,
    })
}
