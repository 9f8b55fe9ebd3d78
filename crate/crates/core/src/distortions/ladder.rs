//! Versioned severity ladders and the JSON override file.
//!
//! Override file layout:
//!
//! ```json
//! { "version": "v1",
//!   "ladders": { "gaussian_blur": [{"sigma": 0.5}, {"sigma": 1.0}, ...] } }
//! ```
//!
//! Kinds absent from `ladders` keep their defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DistortionKind, Level};
use crate::error::{Error, Result};

pub const LADDER_VERSION: &str = "v1";

/// Which way a ladder parameter moves as severity increases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Domain {
    /// `lo < v <= hi`
    Real {
        lo: f64,
        hi: f64,
    },
    /// `lo <= v < hi`
    RealClosedOpen {
        lo: f64,
        hi: f64,
    },
    Integer {
        lo: f64,
        hi: f64,
    },
    OddInteger {
        lo: f64,
    },
}

impl Domain {
    fn accepts(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            Domain::Real { lo, hi } => v > lo && v <= hi,
            Domain::RealClosedOpen { lo, hi } => v >= lo && v < hi,
            Domain::Integer { lo, hi } => v.fract() == 0.0 && v >= lo && v <= hi,
            Domain::OddInteger { lo } => v.fract() == 0.0 && v >= lo && (v as i64) % 2 == 1,
        }
    }
}

struct KindInfo {
    param: &'static str,
    direction: Direction,
    domain: Domain,
    defaults: [f64; 5],
}

const INF: f64 = f64::INFINITY;

fn kind_info(kind: DistortionKind) -> KindInfo {
    use Direction::*;
    use DistortionKind::*;
    let real = |lo, hi| Domain::Real { lo, hi };
    let int = |lo, hi| Domain::Integer { lo, hi };
    let (param, direction, domain, defaults) = match kind {
        Brighten => ("blend", Increasing, real(0.0, 1.0), [0.2, 0.4, 0.6, 0.8, 1.0]),
        Darken => ("blend", Increasing, real(0.0, 1.0), [0.2, 0.4, 0.6, 0.8, 1.0]),
        MeanShift => ("shift", Increasing, real(0.0, 1.0), [0.04, 0.08, 0.12, 0.16, 0.20]),
        GaussianBlur => ("sigma", Increasing, real(0.0, INF), [0.8, 1.6, 2.4, 3.2, 4.0]),
        LensBlur => ("radius", Increasing, int(1.0, INF), [1.0, 2.0, 4.0, 6.0, 8.0]),
        MotionBlur => ("length", Increasing, Domain::OddInteger { lo: 3.0 }, [5.0, 9.0, 13.0, 17.0, 21.0]),
        Jitter => ("displacement", Increasing, real(0.0, INF), [1.0, 2.0, 3.0, 4.0, 5.0]),
        NonEccentricityPatch => ("patches", Increasing, int(1.0, INF), [10.0, 20.0, 30.0, 40.0, 50.0]),
        Pixelate => ("factor", Decreasing, Domain::RealClosedOpen { lo: 0.01, hi: 1.0 }, [0.5, 0.4, 0.3, 0.2, 0.1]),
        Quantization => ("classes", Decreasing, int(2.0, 256.0), [8.0, 7.0, 6.0, 5.0, 4.0]),
        ColorBlock => ("blocks", Increasing, int(1.0, INF), [2.0, 4.0, 6.0, 8.0, 10.0]),
        WhiteNoise => ("sigma", Increasing, real(0.0, INF), [0.05, 0.10, 0.15, 0.20, 0.25]),
        WhiteNoiseCc => ("sigma", Increasing, real(0.0, INF), [0.05, 0.10, 0.15, 0.20, 0.25]),
        ImpulseNoise => ("probability", Increasing, real(0.0, 1.0), [0.02, 0.05, 0.10, 0.15, 0.20]),
        MultiplicativeNoise => ("sigma", Increasing, real(0.0, INF), [0.10, 0.20, 0.30, 0.45, 0.60]),
        ColorDiffusion => ("sigma", Increasing, real(0.0, INF), [1.0, 3.0, 6.0, 10.0, 15.0]),
        ColorShift => ("shift", Increasing, int(1.0, INF), [2.0, 4.0, 8.0, 12.0, 16.0]),
        ColorSaturation1 => {
            ("factor", Decreasing, Domain::RealClosedOpen { lo: 0.0, hi: 1.0 }, [0.7, 0.5, 0.3, 0.15, 0.0])
        }
        ColorSaturation2 => ("factor", Increasing, real(1.0, INF), [1.5, 2.0, 3.0, 4.0, 6.0]),
        Jpeg2000 => ("bpp", Decreasing, real(0.0, 24.0), [0.5, 0.25, 0.12, 0.06, 0.03]),
        Jpeg => ("quality", Decreasing, int(1.0, 100.0), [43.0, 25.0, 15.0, 10.0, 7.0]),
        HighSharpen => ("amount", Increasing, real(0.0, INF), [1.0, 2.0, 3.0, 6.0, 12.0]),
        NonlinearContrast => ("exponent", Increasing, real(1.0, INF), [1.3, 1.6, 2.0, 2.5, 3.0]),
        LinearContrast => ("factor", Decreasing, real(0.0, 1.0), [0.85, 0.7, 0.55, 0.4, 0.3]),
    };
    KindInfo { param, direction, domain, defaults }
}

/// The parameter name carried by `kind`'s ladder records.
pub fn param_name(kind: DistortionKind) -> &'static str {
    kind_info(kind).param
}

pub fn direction(kind: DistortionKind) -> Direction {
    kind_info(kind).direction
}

/// One ladder entry: a named scalar parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRecord {
    pub name: &'static str,
    pub value: f64,
}

impl ParamRecord {
    pub fn to_json(self) -> serde_json::Value {
        serde_json::json!({ self.name: self.value })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderTable {
    version: String,
    values: BTreeMap<DistortionKind, [f64; 5]>,
}

impl Default for LadderTable {
    fn default() -> Self {
        Self {
            version: LADDER_VERSION.to_owned(),
            values: DistortionKind::ALL.into_iter().map(|k| (k, kind_info(k).defaults)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LadderFile {
    version: String,
    ladders: BTreeMap<String, Vec<BTreeMap<String, f64>>>,
}

impl LadderTable {
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn value(&self, kind: DistortionKind, level: Level) -> f64 {
        self.values[&kind][level.index()]
    }

    pub fn records(&self, kind: DistortionKind) -> [ParamRecord; 5] {
        let name = param_name(kind);
        self.values[&kind].map(|value| ParamRecord { name, value })
    }

    /// Replaces `kind`'s ladder after validating it.
    pub fn set(&mut self, kind: DistortionKind, values: [f64; 5]) -> Result<()> {
        let s = kind_info(kind);
        if let Some(bad) = values.iter().find(|&&v| !s.domain.accepts(v)) {
            return Err(Error::Ladder(format!("{kind}: {} = {bad} outside valid domain", s.param)));
        }
        let monotone = values.windows(2).all(|w| match s.direction {
            Direction::Increasing => w[1] > w[0],
            Direction::Decreasing => w[1] < w[0],
        });
        if !monotone {
            return Err(Error::Ladder(format!(
                "{kind}: ladder {values:?} is not strictly {} with severity",
                match s.direction {
                    Direction::Increasing => "increasing",
                    Direction::Decreasing => "decreasing",
                }
            )));
        }
        self.values.insert(kind, values);
        Ok(())
    }

    /// Parses an override document on top of the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: LadderFile = serde_json::from_str(text).map_err(|e| Error::Ladder(e.to_string()))?;
        if file.version.is_empty() {
            return Err(Error::Ladder("empty version string".into()));
        }
        let mut table = LadderTable { version: file.version, ..Default::default() };
        for (name, records) in file.ladders {
            let kind: DistortionKind =
                name.parse().map_err(|_| Error::Ladder(format!("unknown distortion kind `{name}`")))?;
            if records.len() != Level::COUNT {
                return Err(Error::Ladder(format!("{kind}: expected 5 records, got {}", records.len())));
            }
            let expected = param_name(kind);
            let mut values = [0.0; 5];
            for (slot, record) in values.iter_mut().zip(&records) {
                match (record.len(), record.get(expected)) {
                    (1, Some(&v)) => *slot = v,
                    _ => {
                        return Err(Error::Ladder(format!(
                            "{kind}: each record must be {{\"{expected}\": <number>}}, got {record:?}"
                        )))
                    }
                }
            }
            table.set(kind, values)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = LadderFile {
            version: self.version.clone(),
            ladders: self
                .values
                .iter()
                .map(|(k, vals)| {
                    let records = vals.iter().map(|&v| BTreeMap::from([(param_name(*k).to_owned(), v)])).collect();
                    (k.name().to_owned(), records)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("ladder table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_monotone() {
        let defaults = LadderTable::default();
        for kind in DistortionKind::ALL {
            let mut t = LadderTable::default();
            t.set(kind, kind_info(kind).defaults).unwrap();
            assert_eq!(defaults.records(kind).len(), 5);
        }
    }

    #[test]
    fn shipped_values() {
        let t = LadderTable::default();
        let blur: Vec<f64> = t.records(DistortionKind::GaussianBlur).iter().map(|r| r.value).collect();
        assert_eq!(blur, vec![0.8, 1.6, 2.4, 3.2, 4.0]);
        let q: Vec<f64> = t.records(DistortionKind::Jpeg).iter().map(|r| r.value).collect();
        assert!(q.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(t.version(), "v1");
    }

    #[test]
    fn json_round_trip() {
        let t = LadderTable::default();
        assert_eq!(LadderTable::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn partial_override() {
        let text = r#"{"version":"custom","ladders":{"gaussian_blur":[{"sigma":0.5},{"sigma":1},{"sigma":2},{"sigma":3},{"sigma":5}]}}"#;
        let t = LadderTable::from_json(text).unwrap();
        assert_eq!(t.version(), "custom");
        assert_eq!(t.value(DistortionKind::GaussianBlur, Level::new(5).unwrap()), 5.0);
        assert_eq!(t.value(DistortionKind::Jpeg, Level::new(1).unwrap()), 43.0);
    }

    #[test]
    fn invalid_overrides_rejected() {
        let cases = [
            r#"{"version":"x","ladders":{"gaussian_blur":[{"sigma":1},{"sigma":2}]}}"#,
            r#"{"version":"x","ladders":{"gaussian_blur":[{"sigma":2},{"sigma":1},{"sigma":3},{"sigma":4},{"sigma":5}]}}"#,
            r#"{"version":"x","ladders":{"gaussian_blur":[{"radius":1},{"sigma":2},{"sigma":3},{"sigma":4},{"sigma":5}]}}"#,
            r#"{"version":"x","ladders":{"jpeg":[{"quality":40.5},{"quality":30},{"quality":20},{"quality":10},{"quality":5}]}}"#,
            r#"{"version":"x","ladders":{"motion_blur":[{"length":4},{"length":5},{"length":7},{"length":9},{"length":11}]}}"#,
            r#"{"version":"x","ladders":{"sparkle":[]}}"#,
            r#"{"version":"x","ladders":{},"extra":1}"#,
        ];
        for text in cases {
            assert!(matches!(LadderTable::from_json(text), Err(Error::Ladder(_))), "{text}");
        }
    }
}
