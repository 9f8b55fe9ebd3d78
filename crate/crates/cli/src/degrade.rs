use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use degradekit::degradation::{
    collect_inputs, degrade_files, sample_degradation, write_manifest, DegradeConfig, FileOutcome, PipelineOptions,
};
use degradekit::distortions::DistortionKind;
use degradekit::rng::stream_rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::*;

#[derive(Args, Debug)]
pub struct SamplingFlags {
    /// Master seed for all per-image streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Probability of leaving an image pristine.
    #[arg(long)]
    pub p_prist: Option<f64>,
    /// Standard deviation of the level distribution.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Maximum number of distortions per composition.
    #[arg(long = "ndist")]
    pub n_dist_max: Option<usize>,
    /// Kinds never sampled (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub exclude: Option<Vec<DistortionKind>>,
}

impl SamplingFlags {
    pub fn apply(&self, cfg: &mut DegradeConfig) {
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.p_prist {
            cfg.p_prist = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.n_dist_max {
            cfg.n_dist_max = v;
        }
        if let Some(v) = &self.exclude {
            cfg.excluded_kinds = v.iter().copied().collect();
        }
    }
}

#[derive(Args, Debug)]
pub struct DistorterFlags {
    /// Ladder override file (JSON).
    #[arg(long)]
    pub ladder: Option<PathBuf>,
    /// Codec used for jpeg2000 steps.
    #[arg(long, value_enum)]
    pub j2k_adapter: Option<J2kAdapter>,
}

impl DistorterFlags {
    pub fn apply(&self, s: &mut DistorterSettings) {
        if let Some(p) = &self.ladder {
            s.ladder = Some(p.clone());
        }
        if let Some(a) = self.j2k_adapter {
            s.j2k_adapter = a;
        }
        s.resolve_env();
    }
}

#[derive(Args, Debug)]
pub struct DegradeArgs {
    /// Image file or directory of images.
    pub input: PathBuf,
    /// Output directory for images, manifest.jsonl and errors.jsonl.
    #[arg(short, long)]
    pub output: PathBuf,
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
    /// Skip images that need a missing codec instead of failing them.
    #[arg(long)]
    pub skip_unsupported: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeRun {
    pub input: PathBuf,
    pub output: PathBuf,
    pub degrade: DegradeConfig,
    pub distorter: DistorterSettings,
    pub workers: Option<usize>,
    pub skip_unsupported: bool,
}

pub fn run(args: &DegradeArgs) -> CliResult<Completion> {
    let mut cfg: DegradeRun = load_config(args.config.as_deref())?;
    cfg.input = args.input.clone();
    cfg.output = args.output.clone();
    args.sampling.apply(&mut cfg.degrade);
    args.distorter.apply(&mut cfg.distorter);
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    cfg.skip_unsupported |= args.skip_unsupported;
    echo_config("degrade", &cfg);
    cfg.degrade.validate()?;

    let distorter = cfg.distorter.build()?;
    let inputs = collect_inputs(&cfg.input).map_err(|e| usage(e.to_string()))?;
    if inputs.is_empty() {
        return Err(usage(format!("no png or jpeg images found in {}", cfg.input.display())));
    }
    let options = PipelineOptions { skip_unsupported: cfg.skip_unsupported };
    let outcomes =
        with_workers(cfg.workers, || degrade_files(&inputs, &cfg.output, &cfg.degrade, &distorter, &options))??;
    write_outputs(&cfg.output, &outcomes)?;

    let failed = outcomes.iter().filter(|o| o.is_failure()).count();
    let written = outcomes.iter().filter(|o| matches!(o, FileOutcome::Written(_))).count();
    eprintln!("degradekit degrade: {written} written, {} skipped, {failed} failed", outcomes.len() - written - failed);
    Ok(if failed > 0 { Completion::Partial } else { Completion::Clean })
}

fn write_outputs(dir: &Path, outcomes: &[FileOutcome]) -> CliResult<()> {
    let records = outcomes.iter().filter_map(|o| match o {
        FileOutcome::Written(r) => Some(r),
        _ => None,
    });
    write_manifest(create_file(&dir.join("manifest.jsonl"))?, records)?;

    let path = dir.join("errors.jsonl");
    let mut w = create_file(&path)?;
    for o in outcomes {
        let line = match o {
            FileOutcome::Written(_) => continue,
            FileOutcome::Skipped { source_path, reason } => {
                warn(format!("skipped {}: {reason}", source_path.display()));
                json!({"source_path": source_path, "status": "skipped", "error": reason})
            }
            FileOutcome::Failed { source_path, error } => {
                eprintln!("degradekit: error: {}: {error}", source_path.display());
                json!({"source_path": source_path, "status": "failed", "error": error.to_string()})
            }
        };
        writeln!(w, "{line}").map_err(|e| run_err(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| run_err(format!("{}: {e}", path.display())))
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Number of degradations to draw [default: 10].
    #[arg(long)]
    pub count: Option<u64>,
    /// JSON config file with a `degrade` section; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingFlags,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRun {
    pub count: u64,
    pub degrade: DegradeConfig,
}

impl Default for SampleRun {
    fn default() -> Self {
        Self { count: 10, degrade: DegradeConfig::default() }
    }
}

/// Prints one JSON line per sampled degradation; draw `i` uses stream `(seed, i)`.
pub fn run_sample(args: &SampleArgs) -> CliResult<Completion> {
    let mut cfg: SampleRun = load_config(args.config.as_deref())?;
    if let Some(n) = args.count {
        cfg.count = n;
    }
    args.sampling.apply(&mut cfg.degrade);
    echo_config("sample", &cfg);
    cfg.degrade.validate()?;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    for i in 0..cfg.count {
        let mut rng = stream_rng(cfg.degrade.master_seed, i);
        let d = sample_degradation(&cfg.degrade, &mut rng)?;
        let line = json!({"index": i, "pristine": d.is_pristine(), "steps": d.steps()});
        writeln!(out, "{line}").map_err(|e| run_err(e.to_string()))?;
    }
    out.flush().map_err(|e| run_err(e.to_string()))?;
    Ok(Completion::Clean)
}
