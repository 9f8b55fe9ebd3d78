use std::path::PathBuf;

use clap::Args;
use degradekit::degradation::{count_compositions, CountMode};
use degradekit::distortions::group_sizes;
use serde::{Deserialize, Serialize};

use crate::common::*;
use crate::degrade::DistorterFlags;

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Kinds per group (comma separated) [default: 3,3,5,4,4,2,3].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<u64>>,
    /// Severity levels per kind [default: 5].
    #[arg(long)]
    pub levels: Option<u64>,
    /// Longest composition [default: 4].
    #[arg(long)]
    pub ndist: Option<usize>,
    /// `literal` or `distinct_groups` [default: literal].
    #[arg(long)]
    pub mode: Option<CountMode>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountRun {
    pub sizes: Vec<u64>,
    pub levels: u64,
    pub ndist: usize,
    pub mode: CountMode,
}

impl Default for CountRun {
    fn default() -> Self {
        Self { sizes: group_sizes().iter().map(|&s| s as u64).collect(), levels: 5, ndist: 4, mode: CountMode::Literal }
    }
}

pub fn run(args: &CountArgs) -> CliResult<Completion> {
    let mut cfg: CountRun = load_config(args.config.as_deref())?;
    if let Some(v) = &args.sizes {
        cfg.sizes = v.clone();
    }
    if let Some(v) = args.levels {
        cfg.levels = v;
    }
    if let Some(v) = args.ndist {
        cfg.ndist = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = v;
    }
    echo_config("count", &cfg);
    let n = count_compositions(&cfg.sizes, cfg.levels, cfg.ndist, cfg.mode)?;
    println!("{n}");
    Ok(Completion::Clean)
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    #[command(flatten)]
    pub distorter: DistorterFlags,
}

/// Prints the resolved ladder table as JSON.
pub fn run_ladder(args: &LadderArgs) -> CliResult<Completion> {
    let mut settings = DistorterSettings::default();
    args.distorter.apply(&mut settings);
    echo_config("ladder", &settings);
    println!("{}", settings.ladders()?.to_json());
    Ok(Completion::Clean)
}
