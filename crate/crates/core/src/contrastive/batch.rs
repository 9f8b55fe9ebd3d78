use rand::Rng;
use rayon::prelude::*;

use super::{view_index, Scale, Source, BLOCKS};
use crate::degradation::{apply_composition, Degradation};
use crate::distortions::Distorter;
use crate::error::{Error, Result};
use crate::imgproc::{random_crop, resize, ImageBuffer, ResizeMethod};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug)]
pub struct View {
    pub source: Source,
    pub scale: Scale,
    pub pair_index: usize,
    pub patch: ImageBuffer,
}

/// `4B` degraded patches in block order plus the degradation of each pair.
#[derive(Clone, Debug)]
pub struct TrainingBatch {
    pairs: usize,
    views: Vec<ImageBuffer>,
    degradations: Vec<Degradation>,
}

impl TrainingBatch {
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Patches in row order: `[(1, full), (2, full), (1, half), (2, half)] x B`.
    pub fn patches(&self) -> &[ImageBuffer] {
        &self.views
    }

    pub fn view(&self, source: Source, scale: Scale, i: usize) -> &ImageBuffer {
        &self.views[view_index(self.pairs, source, scale, i)]
    }

    pub fn views(&self) -> impl Iterator<Item = View> + '_ {
        self.views.iter().enumerate().map(|(v, patch)| {
            let (source, scale) = BLOCKS[v / self.pairs];
            View { source, scale, pair_index: v % self.pairs, patch: patch.clone() }
        })
    }

    /// Composition label of each view; views of pair `i` carry label `i`.
    pub fn composition_ids(&self) -> Vec<usize> {
        (0..self.views.len()).map(|v| v % self.pairs).collect()
    }

    pub fn degradations(&self) -> &[Degradation] {
        &self.degradations
    }
}

fn check_size(img: &ImageBuffer, patch: usize, pair: usize, source: u8) -> Result<()> {
    let (w, h) = img.dims();
    if w < 2 * patch || h < 2 * patch {
        return Err(Error::invalid(format!(
            "pair {pair} image {source} is {w}x{h}; need at least {0}x{0} for patch {patch}",
            2 * patch
        )));
    }
    Ok(())
}

/// Crops each image at full and half scale, then applies pair `i`'s degradation
/// to all four crops with the same random stream.
pub fn build_training_batch<R: Rng + ?Sized>(
    pairs: &[(ImageBuffer, ImageBuffer)],
    degradations: &[Degradation],
    patch: usize,
    distorter: &Distorter,
    rng: &mut R,
) -> Result<TrainingBatch> {
    let b = pairs.len();
    if b == 0 {
        return Err(Error::invalid("a training batch needs at least one pair"));
    }
    if degradations.len() != b {
        return Err(Error::invalid(format!("{} degradations for {b} pairs", degradations.len())));
    }
    if patch == 0 {
        return Err(Error::invalid("patch size must be positive"));
    }
    for (i, (x1, x2)) in pairs.iter().enumerate() {
        check_size(x1, patch, i, 1)?;
        check_size(x2, patch, i, 2)?;
    }
    let seeds: Vec<u64> = (0..b).map(|_| rng.random()).collect();

    let per_pair: Vec<[ImageBuffer; 4]> = pairs
        .par_iter()
        .zip(degradations.par_iter())
        .zip(seeds.par_iter())
        .map(|(((x1, x2), deg), &seed)| -> Result<[ImageBuffer; 4]> {
            let mut crop_rng = rng_from_seed(seed);
            let half = |x: &ImageBuffer| resize(x, x.width() / 2, x.height() / 2, ResizeMethod::Bilinear);
            let sources = [x1.clone(), x2.clone(), half(x1)?, half(x2)?];
            let mut crops = Vec::with_capacity(4);
            for src in &sources {
                crops.push(random_crop(src, patch, &mut crop_rng)?.0);
            }
            let distort_seed = derive_seed(seed, 1);
            let crops: Vec<ImageBuffer> = match deg {
                Degradation::Pristine => crops,
                Degradation::Composed(comp) => crops
                    .iter()
                    .map(|c| apply_composition(c, comp, distorter, &mut rng_from_seed(distort_seed)))
                    .collect::<Result<_>>()?,
            };
            Ok(crops.try_into().expect("four crops"))
        })
        .collect::<Result<_>>()?;

    let mut views = Vec::with_capacity(4 * b);
    for block in 0..4 {
        views.extend(per_pair.iter().map(|crops| crops[block].clone()));
    }
    Ok(TrainingBatch { pairs: b, views, degradations: degradations.to_vec() })
}
