use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use degradekit::quality::gmad_pairs;
use serde::{Deserialize, Serialize};

use crate::common::*;

#[derive(Args, Debug)]
pub struct GmadArgs {
    /// Defender scores CSV (`image_path,score`); its levels form the bins.
    pub defender: PathBuf,
    /// Attacker scores CSV over the same images.
    pub attacker: PathBuf,
    /// Number of quality levels [default: 5].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Write the pair list here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmadRun {
    pub defender: PathBuf,
    pub attacker: PathBuf,
    pub levels: usize,
}

impl Default for GmadRun {
    fn default() -> Self {
        Self { defender: PathBuf::new(), attacker: PathBuf::new(), levels: 5 }
    }
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    image_path: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct Side {
    image_path: String,
    defender_score: f64,
    attacker_score: f64,
}

#[derive(Debug, Serialize)]
struct PairOut {
    level: usize,
    low: Side,
    high: Side,
}

fn read_scores(path: &Path) -> CliResult<Vec<ScoreRow>> {
    let err = |e: csv::Error| usage(format!("{}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(err)?;
    let rows = rdr.deserialize().collect::<Result<Vec<ScoreRow>, _>>().map_err(err)?;
    if let Some(r) = rows.iter().find(|r| !r.score.is_finite()) {
        return Err(usage(format!("{}: non-finite score for {}", path.display(), r.image_path)));
    }
    Ok(rows)
}

/// Aligns the attacker scores to the defender's row order.
fn align(defender: &[ScoreRow], attacker: &[ScoreRow]) -> CliResult<Vec<f64>> {
    let mut by_path = BTreeMap::new();
    for r in attacker {
        if by_path.insert(r.image_path.as_str(), r.score).is_some() {
            return Err(usage(format!("duplicate attacker row for {}", r.image_path)));
        }
    }
    if by_path.len() != defender.len() {
        return Err(usage(format!("defender has {} images, attacker has {}", defender.len(), by_path.len())));
    }
    defender
        .iter()
        .map(|r| {
            by_path
                .get(r.image_path.as_str())
                .copied()
                .ok_or_else(|| usage(format!("attacker has no score for {}", r.image_path)))
        })
        .collect()
}

pub fn run(args: &GmadArgs) -> CliResult<Completion> {
    let mut cfg = GmadRun { defender: args.defender.clone(), attacker: args.attacker.clone(), ..Default::default() };
    if let Some(k) = args.levels {
        cfg.levels = k;
    }
    echo_config("gmad", &cfg);
    let defender = read_scores(&cfg.defender)?;
    let attacker_rows = read_scores(&cfg.attacker)?;
    let attacker = align(&defender, &attacker_rows)?;
    let d: Vec<f64> = defender.iter().map(|r| r.score).collect();
    let side = |i: usize| Side {
        image_path: defender[i].image_path.clone(),
        defender_score: d[i],
        attacker_score: attacker[i],
    };
    let out: Vec<PairOut> = gmad_pairs(&d, &attacker, cfg.levels)?
        .into_iter()
        .map(|p| PairOut { level: p.level, low: side(p.low_index), high: side(p.high_index) })
        .collect();
    emit_json(&out, args.output.as_deref())?;
    Ok(Completion::Clean)
}
