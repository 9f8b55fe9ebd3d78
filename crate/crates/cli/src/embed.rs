use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Args;
use degradekit::contrastive::{handcrafted_features, Projector};
use degradekit::imgproc::{load_image, ImageBuffer};
use degradekit::quality::{five_crop_features, FeatureTable, MosDataset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::common::*;

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Dataset CSV (`image_path,reference_id,mos[,reference_path]`).
    pub dataset: PathBuf,
    /// Feature table CSV to write (`image_path,f0..`, five rows per image).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Crop side in pixels [default: 224].
    #[arg(long)]
    pub crop: Option<usize>,
    /// Projector JSON from `demo-train`; omit for raw handcrafted features.
    #[arg(long)]
    pub projector: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedRun {
    pub dataset: PathBuf,
    pub output: PathBuf,
    pub crop: usize,
    pub projector: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for EmbedRun {
    fn default() -> Self {
        Self { dataset: PathBuf::new(), output: PathBuf::new(), crop: 224, projector: None, workers: None }
    }
}

/// Five-crop features for every image and reference named in the dataset.
/// Relative paths resolve against the dataset file's directory; table keys
/// keep the paths as written.
pub fn run(args: &EmbedArgs) -> CliResult<Completion> {
    let mut cfg: EmbedRun = load_config(args.config.as_deref())?;
    cfg.dataset = args.dataset.clone();
    cfg.output = args.output.clone();
    if let Some(v) = args.crop {
        cfg.crop = v;
    }
    if args.projector.is_some() {
        cfg.projector = args.projector.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    echo_config("embed", &cfg);

    let ds = MosDataset::from_csv(&cfg.dataset).map_err(|e| usage(e.to_string()))?;
    let projector: Option<Projector> = match &cfg.projector {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let base = parent_dir(&cfg.dataset);
    let paths: BTreeSet<&str> = ds
        .rows
        .iter()
        .flat_map(|r| std::iter::once(r.image_path.as_str()).chain(r.reference_path.as_deref()))
        .collect();

    let features = |patch: &ImageBuffer| {
        let h = handcrafted_features(patch)?;
        Ok(match &projector {
            Some(p) => p.forward(&h),
            None => h,
        })
    };
    let rows = with_workers(cfg.workers, || {
        paths
            .par_iter()
            .map(|&p| {
                let img = load_image(resolve_path(&base, p))?;
                Ok((p, five_crop_features(&img, cfg.crop, features)?))
            })
            .collect::<Vec<degradekit::Result<_>>>()
    })?;

    let mut table: Option<FeatureTable> = None;
    let mut failed = 0;
    for r in rows {
        match r {
            Ok((p, crops)) => {
                table.get_or_insert_with(|| FeatureTable::new(crops[0].len())).insert(p, crops)?;
            }
            Err(e) => {
                eprintln!("degradekit: error: {e}");
                failed += 1;
            }
        }
    }
    let table = table.ok_or_else(|| run_err("no image could be embedded"))?;
    table.to_writer(create_file(&cfg.output)?)?;
    eprintln!("degradekit embed: {} images embedded, {failed} failed", table.len());
    Ok(if failed > 0 { Completion::Partial } else { Completion::Clean })
}
