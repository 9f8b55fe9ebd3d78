//! Random ordered distortion compositions.
//!
//! A composition picks `n` distinct groups (`n` uniform in `1..=n_dist_max`),
//! one kind per group, shuffles the order, and draws a level per step from a
//! half-normal discretized to `1..=5`. With probability `p_prist` an image is
//! left pristine instead.

mod count;
mod manifest;
mod pipeline;

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use count::{count_compositions, CountMode};
pub use manifest::{read_manifest, write_manifest, ManifestRecord, StepRecord};
pub use pipeline::{collect_inputs, degrade_files, FileOutcome, PipelineOptions};

use crate::distortions::{Distorter, DistortionGroup, DistortionKind, Level};
use crate::error::{Error, Result};
use crate::imgproc::ImageBuffer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub kind: DistortionKind,
    pub level: Level,
}

impl Step {
    pub fn new(kind: DistortionKind, level: Level) -> Self {
        Self { kind, level }
    }
}

/// An ordered sequence of distortion steps, at most one per group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Step>", into = "Vec<Step>")]
pub struct Composition {
    steps: Vec<Step>,
}

impl Composition {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let comp = Self { steps };
        comp.validate(DistortionGroup::ALL.len())?;
        Ok(comp)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the length bound and one-step-per-group rule.
    pub fn validate(&self, n_dist_max: usize) -> Result<()> {
        if self.steps.is_empty() || self.steps.len() > n_dist_max {
            return Err(Error::invalid(format!("composition length {} outside 1..={n_dist_max}", self.steps.len())));
        }
        let mut seen = [false; 7];
        for step in &self.steps {
            let g = step.kind.group().index();
            if seen[g] {
                return Err(Error::invalid(format!(
                    "composition uses group `{}` more than once",
                    step.kind.group().name()
                )));
            }
            seen[g] = true;
        }
        Ok(())
    }
}

impl TryFrom<Vec<Step>> for Composition {
    type Error = Error;

    fn try_from(steps: Vec<Step>) -> Result<Self> {
        Composition::new(steps)
    }
}

impl From<Composition> for Vec<Step> {
    fn from(c: Composition) -> Self {
        c.steps
    }
}

/// Outcome of the pristine gate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Degradation {
    Pristine,
    Composed(Composition),
}

impl Degradation {
    pub fn is_pristine(&self) -> bool {
        matches!(self, Degradation::Pristine)
    }

    pub fn steps(&self) -> &[Step] {
        match self {
            Degradation::Pristine => &[],
            Degradation::Composed(c) => c.steps(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeConfig {
    pub n_dist_max: usize,
    pub p_prist: f64,
    pub sigma: f64,
    pub excluded_kinds: BTreeSet<DistortionKind>,
    pub master_seed: u64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        Self { n_dist_max: 4, p_prist: 0.05, sigma: 2.5, excluded_kinds: BTreeSet::new(), master_seed: 0 }
    }
}

impl DegradeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=7).contains(&self.n_dist_max) {
            return Err(Error::InvalidConfiguration(format!("n_dist_max must be in 1..=7, got {}", self.n_dist_max)));
        }
        if !(0.0..=1.0).contains(&self.p_prist) {
            return Err(Error::InvalidConfiguration(format!("p_prist must be in [0, 1], got {}", self.p_prist)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    fn allowed_kinds(&self, group: DistortionGroup) -> Vec<DistortionKind> {
        group.kinds().filter(|k| !self.excluded_kinds.contains(k)).collect()
    }
}

/// Draws `|z|`, `z ~ N(0, sigma)`, and maps it to `clamp(ceil(|z|), 1, 5)`.
pub fn sample_level<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Level {
    let z = Normal::new(0.0, sigma).expect("sigma validated positive").sample(rng);
    let level = z.abs().ceil().clamp(Level::MIN as f64, Level::MAX as f64) as u8;
    Level::new(level).expect("clamped into range")
}

pub fn sample_composition<R: Rng + ?Sized>(config: &DegradeConfig, rng: &mut R) -> Result<Composition> {
    config.validate()?;
    let groups: Vec<(DistortionGroup, Vec<DistortionKind>)> = DistortionGroup::ALL
        .into_iter()
        .map(|g| (g, config.allowed_kinds(g)))
        .filter(|(_, kinds)| !kinds.is_empty())
        .collect();
    if groups.is_empty() {
        return Err(Error::InvalidConfiguration("every distortion kind is excluded".into()));
    }
    let n_max = config.n_dist_max.min(groups.len());
    let n = rng.random_range(1..=n_max);
    let chosen = index::sample(rng, groups.len(), n);
    let mut kinds: Vec<DistortionKind> = chosen
        .iter()
        .map(|g| {
            let options = &groups[g].1;
            options[rng.random_range(0..options.len())]
        })
        .collect();
    kinds.shuffle(rng);
    let steps = kinds.into_iter().map(|kind| Step::new(kind, sample_level(config.sigma, rng))).collect();
    let comp = Composition { steps };
    debug_assert!(comp.validate(config.n_dist_max).is_ok());
    Ok(comp)
}

/// Applies steps left to right, sharing `rng` across them in order.
pub fn apply_composition<R: Rng + ?Sized>(
    img: &ImageBuffer,
    comp: &Composition,
    distorter: &Distorter,
    rng: &mut R,
) -> Result<ImageBuffer> {
    let mut cur = img.clone();
    for step in comp.steps() {
        cur = distorter.apply(&cur, step.kind, step.level, rng)?;
    }
    Ok(cur)
}

/// Draws the pristine gate; on `1 - p_prist` samples and applies a composition.
pub fn maybe_degrade<R: Rng + ?Sized>(
    img: &ImageBuffer,
    config: &DegradeConfig,
    distorter: &Distorter,
    rng: &mut R,
) -> Result<(ImageBuffer, Degradation)> {
    match sample_degradation(config, rng)? {
        Degradation::Pristine => Ok((img.clone(), Degradation::Pristine)),
        Degradation::Composed(comp) => {
            let out = apply_composition(img, &comp, distorter, rng)?;
            Ok((out, Degradation::Composed(comp)))
        }
    }
}

/// The sampling half of [`maybe_degrade`].
pub fn sample_degradation<R: Rng + ?Sized>(config: &DegradeConfig, rng: &mut R) -> Result<Degradation> {
    config.validate()?;
    let u: f64 = rng.random();
    if u < config.p_prist {
        Ok(Degradation::Pristine)
    } else {
        Ok(Degradation::Composed(sample_composition(config, rng)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::sync::Arc;

    fn lvl(v: u8) -> Level {
        Level::new(v).unwrap()
    }

    #[test]
    fn composition_invariants() {
        use DistortionKind::*;
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::new(vec![Step::new(GaussianBlur, lvl(1)), Step::new(LensBlur, lvl(2))]).is_err());
        let ok = Composition::new(vec![Step::new(GaussianBlur, lvl(1)), Step::new(WhiteNoise, lvl(2))]).unwrap();
        assert!(ok.validate(1).is_err());
        let json = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<Composition>(&json).unwrap(), ok);
        let dup = r#"[{"kind":"jpeg","level":1},{"kind":"jpeg2000","level":2}]"#;
        assert!(serde_json::from_str::<Composition>(dup).is_err());
    }

    #[test]
    fn tiny_sigma_always_level_one() {
        let mut rng = rng_from_seed(1);
        assert!((0..10_000).all(|_| sample_level(1e-9, &mut rng).get() == 1));
    }

    #[test]
    fn forced_single_step() {
        let cfg = DegradeConfig { n_dist_max: 1, ..Default::default() };
        let mut rng = rng_from_seed(2);
        for _ in 0..2000 {
            assert_eq!(sample_composition(&cfg, &mut rng).unwrap().len(), 1);
        }
    }

    #[test]
    fn excluded_kinds_never_sampled() {
        let cfg = DegradeConfig {
            n_dist_max: 7,
            excluded_kinds: [DistortionKind::Jpeg2000, DistortionKind::Jpeg].into(),
            ..Default::default()
        };
        let mut rng = rng_from_seed(3);
        for _ in 0..5000 {
            let c = sample_composition(&cfg, &mut rng).unwrap();
            assert!(c.len() <= 6);
            assert!(c.steps().iter().all(|s| s.kind.group() != DistortionGroup::Compression));
        }
    }

    #[test]
    fn all_excluded_is_invalid_configuration() {
        let cfg = DegradeConfig { excluded_kinds: DistortionKind::ALL.into_iter().collect(), ..Default::default() };
        assert!(matches!(sample_composition(&cfg, &mut rng_from_seed(0)), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn config_validation() {
        for cfg in [
            DegradeConfig { n_dist_max: 0, ..Default::default() },
            DegradeConfig { n_dist_max: 8, ..Default::default() },
            DegradeConfig { p_prist: 1.5, ..Default::default() },
            DegradeConfig { sigma: 0.0, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
        let parsed: DegradeConfig = serde_json::from_str(r#"{"sigma": 1.5, "excluded_kinds": ["jpeg2000"]}"#).unwrap();
        assert_eq!(parsed.n_dist_max, 4);
        assert!(parsed.excluded_kinds.contains(&DistortionKind::Jpeg2000));
    }

    #[test]
    fn pristine_gate_extremes() {
        let img = ImageBuffer::filled(8, 8, [0.4; 3]).unwrap();
        let d = Distorter::default().with_jpeg2000(Arc::new(crate::distortions::WaveletCodec::default()));
        let always = DegradeConfig { p_prist: 1.0, ..Default::default() };
        let never = DegradeConfig { p_prist: 0.0, ..Default::default() };
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let (out, tag) = maybe_degrade(&img, &always, &d, &mut rng).unwrap();
            assert!(tag.is_pristine());
            assert_eq!(out, img);
            let (_, tag) = maybe_degrade(&img, &never, &d, &mut rng).unwrap();
            assert!(!tag.is_pristine());
        }
    }

    #[test]
    fn single_step_composition_equals_direct_application() {
        let img = ImageBuffer::from_fn(32, 32, |x, y| [x as f32 / 32.0, y as f32 / 32.0, 0.5]).unwrap();
        let d = Distorter::default();
        let comp = Composition::new(vec![Step::new(DistortionKind::MotionBlur, lvl(3))]).unwrap();
        let a = apply_composition(&img, &comp, &d, &mut rng_from_seed(9)).unwrap();
        let b = d.apply(&img, DistortionKind::MotionBlur, lvl(3), &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn order_matters() {
        use DistortionKind::*;
        let img = ImageBuffer::from_fn(48, 48, |x, y| {
            let v = if (x / 6 + y / 6) % 2 == 0 { 0.85 } else { 0.15 };
            [v, 0.5 + 0.3 * ((x as f32) * 0.4).sin(), 1.0 - v]
        })
        .unwrap();
        let d = Distorter::default();
        let blur_noise =
            Composition::new(vec![Step::new(GaussianBlur, lvl(3)), Step::new(WhiteNoise, lvl(2))]).unwrap();
        let noise_blur =
            Composition::new(vec![Step::new(WhiteNoise, lvl(2)), Step::new(GaussianBlur, lvl(3))]).unwrap();
        let a = apply_composition(&img, &blur_noise, &d, &mut rng_from_seed(5)).unwrap();
        let b = apply_composition(&img, &noise_blur, &d, &mut rng_from_seed(5)).unwrap();
        assert_ne!(a, b);
    }
}
