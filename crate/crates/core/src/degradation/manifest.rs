//! JSON Lines manifest: one record per output image.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Composition, Degradation, Step};
use crate::distortions::{Distorter, DistortionGroup, DistortionKind, Level};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub kind: DistortionKind,
    pub group: DistortionGroup,
    pub level: Level,
    pub params: BTreeMap<String, f64>,
}

impl StepRecord {
    pub fn from_step(step: Step, distorter: &Distorter) -> Self {
        let record = &distorter.ladders().records(step.kind)[step.level.get() as usize - 1];
        let mut params = BTreeMap::new();
        params.insert(record.name.to_string(), record.value);
        Self { kind: step.kind, group: step.kind.group(), level: step.level, params }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub source_path: String,
    pub output_path: String,
    pub seed: u64,
    pub pristine: bool,
    pub steps: Vec<StepRecord>,
}

impl ManifestRecord {
    pub fn new(
        source_path: impl Into<String>,
        output_path: impl Into<String>,
        seed: u64,
        degradation: &Degradation,
        distorter: &Distorter,
    ) -> Self {
        Self {
            source_path: source_path.into(),
            output_path: output_path.into(),
            seed,
            pristine: degradation.is_pristine(),
            steps: degradation.steps().iter().map(|&s| StepRecord::from_step(s, distorter)).collect(),
        }
    }

    /// Rebuilds the sampled label, checking the record is self-consistent.
    pub fn degradation(&self) -> Result<Degradation> {
        if self.pristine {
            if !self.steps.is_empty() {
                return Err(Error::invalid("pristine record carries steps"));
            }
            return Ok(Degradation::Pristine);
        }
        let steps = self
            .steps
            .iter()
            .map(|s| {
                if s.kind.group() != s.group {
                    return Err(Error::invalid(format!(
                        "kind `{}` does not belong to group `{}`",
                        s.kind,
                        s.group.name()
                    )));
                }
                Ok(Step::new(s.kind, s.level))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Degradation::Composed(Composition::new(steps)?))
    }
}

pub fn write_manifest<'a, W: Write>(writer: W, records: impl IntoIterator<Item = &'a ManifestRecord>) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n").map_err(|e| Error::io("<manifest>", e))?;
    }
    w.flush().map_err(|e| Error::io("<manifest>", e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradation::{sample_degradation, DegradeConfig};
    use crate::rng::rng_from_seed;

    #[test]
    fn round_trip_is_lossless() {
        let distorter = Distorter::default();
        let config = DegradeConfig { p_prist: 0.3, ..Default::default() };
        let mut rng = rng_from_seed(11);
        let records: Vec<ManifestRecord> = (0..50)
            .map(|i| {
                let d = sample_degradation(&config, &mut rng).unwrap();
                ManifestRecord::new(format!("in/{i}.png"), format!("out/{i}.png"), i * 7919, &d, &distorter)
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_manifest(File::create(&path).unwrap(), &records).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, records);
        for r in &back {
            let d = r.degradation().unwrap();
            assert_eq!(d.is_pristine(), r.pristine);
            assert_eq!(d.steps().len(), r.steps.len());
        }
    }

    #[test]
    fn params_follow_ladder() {
        let distorter = Distorter::default();
        let step = Step::new(DistortionKind::GaussianBlur, Level::new(3).unwrap());
        let rec = StepRecord::from_step(step, &distorter);
        assert_eq!(rec.group, DistortionGroup::Blur);
        let (name, value) = rec.params.iter().next().unwrap();
        assert_eq!(name, crate::distortions::param_name(DistortionKind::GaussianBlur));
        assert_eq!(*value, distorter.parameter(step.kind, step.level));
    }

    #[test]
    fn inconsistent_records_are_rejected() {
        let line = r#"{"source_path":"a","output_path":"b","seed":1,"pristine":false,
            "steps":[{"kind":"jpeg","group":"blur","level":2,"params":{}}]}"#;
        let rec: ManifestRecord = serde_json::from_str(line).unwrap();
        assert!(rec.degradation().is_err());
        let line = r#"{"source_path":"a","output_path":"b","seed":1,"pristine":false,"steps":[]}"#;
        let rec: ManifestRecord = serde_json::from_str(line).unwrap();
        assert!(rec.degradation().is_err());
    }
}
