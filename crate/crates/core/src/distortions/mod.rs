//! The 24 distortion kernels, grouped into 7 groups, each with a 5-level
//! severity ladder.
//!
//! Every kernel is a pure function of `(image, ladder parameter, rng state)`.
//! Randomized kernels draw a level-independent number of samples so that, for a
//! fixed seed, a higher level perturbs a superset of what a lower level does.

mod blur;
mod brightness;
mod color;
mod compression;
mod ladder;
mod noise;
pub mod otsu;
mod sharpness;
mod spatial;
pub mod wavelet;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use compression::Jpeg2000Codec;
pub use ladder::{direction, param_name, Direction, LadderTable, ParamRecord, LADDER_VERSION};
pub use wavelet::WaveletCodec;

use crate::error::{Error, Result};
use crate::imgproc::ImageBuffer;

/// Distortion groups; a composition uses at most one kind from each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionGroup {
    Brightness,
    Blur,
    Spatial,
    Noise,
    Color,
    Compression,
    SharpnessContrast,
}

impl DistortionGroup {
    pub const ALL: [DistortionGroup; 7] = [
        DistortionGroup::Brightness,
        DistortionGroup::Blur,
        DistortionGroup::Spatial,
        DistortionGroup::Noise,
        DistortionGroup::Color,
        DistortionGroup::Compression,
        DistortionGroup::SharpnessContrast,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn kinds(self) -> impl Iterator<Item = DistortionKind> {
        DistortionKind::ALL.into_iter().filter(move |k| k.group() == self)
    }

    pub fn name(self) -> &'static str {
        match self {
            DistortionGroup::Brightness => "brightness",
            DistortionGroup::Blur => "blur",
            DistortionGroup::Spatial => "spatial",
            DistortionGroup::Noise => "noise",
            DistortionGroup::Color => "color",
            DistortionGroup::Compression => "compression",
            DistortionGroup::SharpnessContrast => "sharpness_contrast",
        }
    }
}

/// Sizes of the seven groups in [`DistortionGroup::ALL`] order.
pub fn group_sizes() -> [usize; 7] {
    DistortionGroup::ALL.map(|g| g.kinds().count())
}

macro_rules! kinds {
    ($($variant:ident => $name:literal, $group:ident;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum DistortionKind {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl DistortionKind {
            pub const ALL: [DistortionKind; 24] = [$(DistortionKind::$variant,)*];

            pub fn name(self) -> &'static str {
                match self { $(DistortionKind::$variant => $name,)* }
            }

            pub fn group(self) -> DistortionGroup {
                match self { $(DistortionKind::$variant => DistortionGroup::$group,)* }
            }
        }

        impl FromStr for DistortionKind {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(DistortionKind::$variant),)*
                    other => Err(Error::invalid(format!("unknown distortion kind `{other}`"))),
                }
            }
        }
    };
}

kinds! {
    Brighten => "brighten", Brightness;
    Darken => "darken", Brightness;
    MeanShift => "mean_shift", Brightness;
    GaussianBlur => "gaussian_blur", Blur;
    LensBlur => "lens_blur", Blur;
    MotionBlur => "motion_blur", Blur;
    Jitter => "jitter", Spatial;
    NonEccentricityPatch => "non_eccentricity_patch", Spatial;
    Pixelate => "pixelate", Spatial;
    Quantization => "quantization", Spatial;
    ColorBlock => "color_block", Spatial;
    WhiteNoise => "white_noise", Noise;
    WhiteNoiseCc => "white_noise_cc", Noise;
    ImpulseNoise => "impulse_noise", Noise;
    MultiplicativeNoise => "multiplicative_noise", Noise;
    ColorDiffusion => "color_diffusion", Color;
    ColorShift => "color_shift", Color;
    ColorSaturation1 => "color_saturation_1", Color;
    ColorSaturation2 => "color_saturation_2", Color;
    Jpeg2000 => "jpeg2000", Compression;
    Jpeg => "jpeg", Compression;
    HighSharpen => "high_sharpen", SharpnessContrast;
    NonlinearContrast => "nonlinear_contrast", SharpnessContrast;
    LinearContrast => "linear_contrast", SharpnessContrast;
}

impl DistortionKind {
    /// Whether the kernel consumes random draws.
    pub fn is_stochastic(self) -> bool {
        use DistortionKind::*;
        matches!(
            self,
            MotionBlur
                | Jitter
                | NonEccentricityPatch
                | ColorBlock
                | WhiteNoise
                | WhiteNoiseCc
                | ImpulseNoise
                | MultiplicativeNoise
                | ColorShift
        )
    }
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Severity level in `1..=5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;
    pub const COUNT: usize = 5;

    pub fn new(value: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::invalid(format!("level must be in 1..=5, got {value}")))
        }
    }

    pub fn all() -> impl Iterator<Item = Level> {
        (Self::MIN..=Self::MAX).map(Level)
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl TryFrom<u8> for Level {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Level::new(v)
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Applies distortions using a ladder table and an optional JPEG2000 adapter.
#[derive(Clone, Default)]
pub struct Distorter {
    ladders: LadderTable,
    jpeg2000: Option<Arc<dyn Jpeg2000Codec>>,
}

impl fmt::Debug for Distorter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Distorter")
            .field("ladder_version", &self.ladders.version())
            .field("jpeg2000", &self.jpeg2000.as_ref().map(|c| c.name().to_owned()))
            .finish()
    }
}

impl Distorter {
    pub fn new(ladders: LadderTable) -> Self {
        Self { ladders, jpeg2000: None }
    }

    /// Registers the codec used by [`DistortionKind::Jpeg2000`].
    pub fn with_jpeg2000(mut self, codec: Arc<dyn Jpeg2000Codec>) -> Self {
        self.jpeg2000 = Some(codec);
        self
    }

    pub fn ladders(&self) -> &LadderTable {
        &self.ladders
    }

    pub fn supports(&self, kind: DistortionKind) -> bool {
        kind != DistortionKind::Jpeg2000 || self.jpeg2000.is_some()
    }

    /// The ladder parameter used for `kind` at `level`.
    pub fn parameter(&self, kind: DistortionKind, level: Level) -> f64 {
        self.ladders.value(kind, level)
    }

    pub fn apply<R: Rng + ?Sized>(
        &self,
        img: &ImageBuffer,
        kind: DistortionKind,
        level: Level,
        rng: &mut R,
    ) -> Result<ImageBuffer> {
        use DistortionKind::*;
        let p = self.parameter(kind, level);
        let out = match kind {
            Brighten => brightness::brighten(img, p),
            Darken => brightness::darken(img, p),
            MeanShift => brightness::mean_shift(img, p),
            GaussianBlur => blur::gaussian_blur(img, p),
            LensBlur => blur::lens_blur(img, p),
            MotionBlur => blur::motion_blur(img, p, rng),
            Jitter => spatial::jitter(img, p, rng),
            NonEccentricityPatch => spatial::non_eccentricity_patch(img, p, rng),
            Pixelate => spatial::pixelate(img, p)?,
            Quantization => spatial::quantization(img, p),
            ColorBlock => spatial::color_block(img, p, rng),
            WhiteNoise => noise::white_noise(img, p, rng),
            WhiteNoiseCc => noise::white_noise_cc(img, p, rng),
            ImpulseNoise => noise::impulse_noise(img, p, rng),
            MultiplicativeNoise => noise::multiplicative_noise(img, p, rng),
            ColorDiffusion => color::color_diffusion(img, p),
            ColorShift => color::color_shift(img, p, rng),
            ColorSaturation1 => color::saturation_hsv(img, p),
            ColorSaturation2 => color::saturation_lab(img, p),
            Jpeg2000 => {
                let codec = self.jpeg2000.as_ref().ok_or(Error::UnsupportedDistortion(kind))?;
                compression::jpeg2000(img, p, codec.as_ref())?
            }
            Jpeg => compression::jpeg(img, p)?,
            HighSharpen => sharpness::high_sharpen(img, p),
            NonlinearContrast => sharpness::nonlinear_contrast(img, p),
            LinearContrast => sharpness::linear_contrast(img, p),
        };
        debug_assert_eq!(out.dims(), img.dims());
        Ok(out)
    }
}

/// Applies one distortion with the default ladders and no JPEG2000 adapter.
pub fn apply_distortion<R: Rng + ?Sized>(
    img: &ImageBuffer,
    kind: DistortionKind,
    level: Level,
    rng: &mut R,
) -> Result<ImageBuffer> {
    Distorter::default().apply(img, kind, level, rng)
}

/// The default five-entry parameter ladder for `kind`.
pub fn severity_ladder(kind: DistortionKind) -> [ParamRecord; 5] {
    LadderTable::default().records(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::collections::HashSet;

    fn textured(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, |x, y| {
            let fx = x as f32 / w as f32;
            let fy = y as f32 / h as f32;
            [
                0.5 + 0.4 * (7.0 * fx + 3.0 * fy * fy).sin(),
                fx * fy,
                0.5 + 0.3 * ((x * 31 + y * 17) % 23) as f32 / 23.0 - 0.15,
            ]
        })
        .unwrap()
    }

    fn hash(img: &ImageBuffer) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in img.as_slice() {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    fn distorter() -> Distorter {
        Distorter::default().with_jpeg2000(Arc::new(WaveletCodec::default()))
    }

    #[test]
    fn group_partition_sizes() {
        assert_eq!(group_sizes(), [3, 3, 5, 4, 4, 2, 3]);
        let names: HashSet<_> = DistortionKind::ALL.iter().map(|k| k.name()).collect();
        assert_eq!(names.len(), 24);
        for k in DistortionKind::ALL {
            assert_eq!(k.name().parse::<DistortionKind>().unwrap(), k);
        }
    }

    #[test]
    fn level_bounds() {
        assert!(Level::new(0).is_err());
        assert!(Level::new(6).is_err());
        assert_eq!(Level::all().count(), 5);
        assert!(serde_json::from_str::<Level>("7").is_err());
        assert_eq!(serde_json::from_str::<Level>("3").unwrap().get(), 3);
    }

    #[test]
    fn jpeg2000_without_adapter_is_unsupported() {
        let img = textured(32, 32);
        let err = apply_distortion(&img, DistortionKind::Jpeg2000, Level::new(1).unwrap(), &mut rng_from_seed(0))
            .unwrap_err();
        assert!(matches!(err, Error::UnsupportedDistortion(DistortionKind::Jpeg2000)));
        assert!(err.to_string().contains("jpeg2000"));
        assert!(!Distorter::default().supports(DistortionKind::Jpeg2000));
        assert!(distorter().supports(DistortionKind::Jpeg2000));
    }

    #[test]
    fn every_kind_preserves_dims_range_and_is_deterministic() {
        let d = distorter();
        let img = textured(41, 29);
        for kind in DistortionKind::ALL {
            for level in Level::all() {
                let a = d.apply(&img, kind, level, &mut rng_from_seed(11)).unwrap();
                let b = d.apply(&img, kind, level, &mut rng_from_seed(11)).unwrap();
                assert_eq!(a.dims(), img.dims(), "{kind} L{level}");
                assert!(a.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
                assert_eq!(a, b, "{kind} L{level} not deterministic");
            }
        }
    }

    #[test]
    fn deterministic_kinds_consume_no_draws() {
        let d = distorter();
        let img = textured(24, 24);
        for kind in DistortionKind::ALL.into_iter().filter(|k| !k.is_stochastic()) {
            let mut rng = rng_from_seed(5);
            d.apply(&img, kind, Level::new(3).unwrap(), &mut rng).unwrap();
            let next: u64 = rng.random();
            let untouched: u64 = rng_from_seed(5).random();
            assert_eq!(next, untouched, "{kind} consumed randomness");
        }
    }

    #[test]
    fn stochastic_kinds_depend_on_seed() {
        let d = distorter();
        let img = textured(48, 48);
        for kind in DistortionKind::ALL.into_iter().filter(|k| k.is_stochastic()) {
            let level = Level::new(4).unwrap();
            let a = d.apply(&img, kind, level, &mut rng_from_seed(1)).unwrap();
            let b = d.apply(&img, kind, level, &mut rng_from_seed(2)).unwrap();
            assert_ne!(hash(&a), hash(&b), "{kind}");
        }
    }

    #[test]
    fn mean_shift_on_constant() {
        let img = ImageBuffer::filled(16, 16, [0.5; 3]).unwrap();
        let out =
            apply_distortion(&img, DistortionKind::MeanShift, Level::new(1).unwrap(), &mut rng_from_seed(0)).unwrap();
        let delta = severity_ladder(DistortionKind::MeanShift)[0].value;
        for v in out.as_slice() {
            assert!((v - (0.5 + delta as f32)).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_blur_preserves_constant() {
        let img = ImageBuffer::filled(20, 20, [0.3, 0.5, 0.7]).unwrap();
        for level in Level::all() {
            let out = apply_distortion(&img, DistortionKind::GaussianBlur, level, &mut rng_from_seed(0)).unwrap();
            for (a, b) in out.as_slice().iter().zip(img.as_slice()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn quantization_limits_distinct_values() {
        let img = textured(64, 64);
        for level in Level::all() {
            let classes = severity_ladder(DistortionKind::Quantization)[level.index()].value as usize;
            let out = apply_distortion(&img, DistortionKind::Quantization, level, &mut rng_from_seed(0)).unwrap();
            for c in 0..3 {
                let distinct: HashSet<u32> = out.channel(c).iter().map(|v| v.to_bits()).collect();
                assert!(distinct.len() <= classes, "L{level} ch{c}: {} > {classes}", distinct.len());
            }
        }
    }

    #[test]
    fn saturation_removal_gives_gray() {
        let img = textured(16, 16);
        let out =
            apply_distortion(&img, DistortionKind::ColorSaturation1, Level::new(5).unwrap(), &mut rng_from_seed(0))
                .unwrap();
        for px in out.as_slice().chunks_exact(3) {
            assert!((px[0] - px[1]).abs() < 1e-5 && (px[1] - px[2]).abs() < 1e-5);
        }
    }
}
