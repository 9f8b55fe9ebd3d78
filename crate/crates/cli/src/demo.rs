use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use degradekit::contrastive::{run_demo, write_embeddings_csv, DemoConfig, DemoReport};
use degradekit::corpus::procedural_corpus;
use degradekit::degradation::collect_inputs;
use degradekit::imgproc::{load_image, ImageBuffer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::*;
use crate::degrade::{DistorterFlags, SamplingFlags};

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Directory of corpus images; omit to use `--synthetic`.
    pub corpus: Option<PathBuf>,
    /// Output directory for loss.csv, embeddings.csv, retrieval.json and projector.json.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Generate this many procedural images instead of reading a corpus.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Side length of procedural images [default: 2 * patch].
    #[arg(long)]
    pub synthetic_size: Option<usize>,
    /// Pairs per batch [default: 16].
    #[arg(long)]
    pub batch: Option<usize>,
    /// Temperature [default: 0.1].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Patch side in pixels [default: 224].
    #[arg(long)]
    pub patch: Option<usize>,
    /// Training epochs; 0 reports the untrained baseline only [default: 30].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate [default: 0.5].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Batches drawn from the training pool [default: 10].
    #[arg(long)]
    pub train_batches: Option<usize>,
    /// Batches drawn from the held-out pool [default: 5].
    #[arg(long)]
    pub heldout_batches: Option<usize>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingFlags,
    #[command(flatten)]
    pub distorter: DistorterFlags,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCorpus {
    pub count: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoRun {
    pub corpus: Option<PathBuf>,
    pub synthetic: Option<SyntheticCorpus>,
    pub output: PathBuf,
    pub demo: DemoConfig,
    pub distorter: DistorterSettings,
    pub workers: Option<usize>,
}

fn resolve(args: &DemoArgs) -> CliResult<DemoRun> {
    let mut cfg: DemoRun = load_config(args.config.as_deref())?;
    cfg.output = args.output.clone();
    if args.corpus.is_some() {
        cfg.corpus = args.corpus.clone();
        cfg.synthetic = None;
    }
    let d = &mut cfg.demo;
    if let Some(v) = args.batch {
        d.batch = v;
    }
    if let Some(v) = args.tau {
        d.train.tau = v;
    }
    if let Some(v) = args.patch {
        d.patch = v;
    }
    if let Some(v) = args.epochs {
        d.train.epochs = v;
    }
    if let Some(v) = args.lr {
        d.train.lr = v;
    }
    if let Some(v) = args.train_batches {
        d.train_batches = v;
    }
    if let Some(v) = args.heldout_batches {
        d.heldout_batches = v;
    }
    args.sampling.apply(&mut d.degrade);
    if let Some(seed) = args.sampling.seed {
        d.seed = seed;
    }
    if let Some(count) = args.synthetic {
        let size = args.synthetic_size.unwrap_or(2 * d.patch);
        cfg.synthetic = Some(SyntheticCorpus { count, size });
        cfg.corpus = None;
    } else if let (Some(s), Some(size)) = (cfg.synthetic.as_mut(), args.synthetic_size) {
        s.size = size;
    }
    args.distorter.apply(&mut cfg.distorter);
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    match (&cfg.corpus, &cfg.synthetic) {
        (None, None) => Err(usage("give a corpus directory or --synthetic COUNT")),
        (Some(_), Some(_)) => Err(usage("corpus directory and synthetic corpus are mutually exclusive")),
        _ => Ok(cfg),
    }
}

fn load_corpus(cfg: &DemoRun) -> CliResult<Vec<ImageBuffer>> {
    if let Some(s) = &cfg.synthetic {
        return Ok(procedural_corpus(s.count, s.size, s.size, cfg.demo.seed));
    }
    let dir = cfg.corpus.as_ref().expect("resolved");
    let paths = collect_inputs(dir).map_err(|e| usage(e.to_string()))?;
    paths.par_iter().map(|p| load_image(p).map_err(Failure::from)).collect()
}

pub fn run(args: &DemoArgs) -> CliResult<Completion> {
    let cfg = resolve(args)?;
    echo_config("demo-train", &cfg);
    if cfg.demo.train.epochs > 0 {
        cfg.demo.train.validate()?;
    }
    cfg.demo.degrade.validate()?;
    let distorter = cfg.distorter.build()?;
    let report = with_workers(cfg.workers, || -> CliResult<DemoReport> {
        let images = load_corpus(&cfg)?;
        Ok(run_demo(&images, &cfg.demo, &distorter)?)
    })??;
    write_outputs(&cfg.output, &report)?;
    Ok(Completion::Clean)
}

fn write_outputs(dir: &Path, report: &DemoReport) -> CliResult<()> {
    let io = |p: &Path, e: std::io::Error| run_err(format!("{}: {e}", p.display()));

    let loss_path = dir.join("loss.csv");
    let mut w = create_file(&loss_path)?;
    writeln!(w, "epoch,loss").map_err(|e| io(&loss_path, e))?;
    for (i, l) in report.loss_trace.iter().enumerate() {
        writeln!(w, "{},{l}", i + 1).map_err(|e| io(&loss_path, e))?;
    }
    w.flush().map_err(|e| io(&loss_path, e))?;

    write_embeddings_csv(create_file(&dir.join("embeddings.csv"))?, &report.heldout_embeddings)?;
    if let Some(p) = &report.projector {
        emit_json(p, Some(&dir.join("projector.json")))?;
    }

    let summary = json!({
        "chance": report.chance,
        "untrained_retrieval": report.untrained_retrieval,
        "trained_retrieval": report.trained_retrieval,
        "initial_loss": report.loss_trace.first(),
        "final_loss": report.loss_trace.last(),
        "epochs": report.loss_trace.len(),
    });
    emit_json(&summary, Some(&dir.join("retrieval.json")))?;
    emit_json(&summary, None)
}
