use std::path::PathBuf;

use clap::Args;
use degradekit::quality::{
    alpha_sweep, cross_dataset, default_alphas, evaluate_protocol, AlphaSweep, CrossReport, FeatureMode, FeatureTable,
    MosDataset, ProtocolOptions, ProtocolReport,
};
use serde::{Deserialize, Serialize};

use crate::common::*;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Dataset CSV (`image_path,reference_id,mos[,reference_path]`).
    pub dataset: PathBuf,
    /// Feature table CSV (`image_path,f0..`) covering every image used.
    pub features: PathBuf,
    /// Ridge penalty [default: 0.1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Random splits [default: 10].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Split seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train on all of `dataset` and test on this dataset.
    #[arg(long)]
    pub cross_test: Option<PathBuf>,
    /// Full-reference mode: features are `|h_ref - h_dist|`.
    #[arg(long)]
    pub fr: bool,
    /// Also sweep alpha on the validation split.
    #[arg(long)]
    pub sweep: bool,
    /// Alpha grid for `--sweep` (comma separated) [default: 1e-3..1e3 by decades].
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalRun {
    pub dataset: PathBuf,
    pub features: PathBuf,
    pub protocol: ProtocolOptions,
    pub cross_test: Option<PathBuf>,
    pub sweep: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    protocol: ProtocolReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<AlphaSweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross: Option<CrossReport>,
}

pub fn run(args: &EvalArgs) -> CliResult<Completion> {
    let mut cfg: EvalRun = load_config(args.config.as_deref())?;
    cfg.dataset = args.dataset.clone();
    cfg.features = args.features.clone();
    let p = &mut cfg.protocol;
    if let Some(v) = args.alpha {
        p.alpha = v;
    }
    if let Some(v) = args.repeats {
        p.repeats = v;
    }
    if let Some(v) = args.seed {
        p.seed = v;
    }
    if args.fr {
        p.mode = FeatureMode::FullReference;
    }
    if args.cross_test.is_some() {
        cfg.cross_test = args.cross_test.clone();
    }
    if let Some(a) = &args.alphas {
        cfg.sweep = Some(a.clone());
    } else if args.sweep && cfg.sweep.is_none() {
        cfg.sweep = Some(default_alphas());
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    echo_config("eval", &cfg);

    let ds = MosDataset::from_csv(&cfg.dataset).map_err(|e| usage(e.to_string()))?;
    let table = FeatureTable::from_csv(&cfg.features).map_err(|e| usage(e.to_string()))?;
    let cross_ds = match &cfg.cross_test {
        Some(p) => Some(MosDataset::from_csv(p).map_err(|e| usage(e.to_string()))?),
        None => None,
    };

    let report = with_workers(cfg.workers, || -> CliResult<EvalReport> {
        let protocol = evaluate_protocol(&ds, &table, &cfg.protocol)?;
        let sweep = match &cfg.sweep {
            Some(alphas) => Some(alpha_sweep(&ds, &table, &cfg.protocol, alphas)?),
            None => None,
        };
        let cross = match &cross_ds {
            Some(test) => Some(cross_dataset(&ds, test, &table, cfg.protocol.alpha, cfg.protocol.mode)?),
            None => None,
        };
        Ok(EvalReport { protocol, sweep, cross })
    })??;
    emit_json(&report, args.output.as_deref())?;
    Ok(Completion::Clean)
}
