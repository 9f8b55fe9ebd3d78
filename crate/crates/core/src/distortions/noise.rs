use rand::Rng;
use rand_distr::StandardNormal;

use crate::imgproc::{rgb_to_ycbcr, ycbcr_to_rgb, ImageBuffer};

/// Adds `sigma * N(0, 1)` to every sample without clamping.
pub(crate) fn add_gaussian<R: Rng + ?Sized>(samples: &[f32], sigma: f64, rng: &mut R) -> Vec<f32> {
    samples
        .iter()
        .map(|&v| {
            let z: f64 = rng.sample(StandardNormal);
            (v as f64 + sigma * z) as f32
        })
        .collect()
}

pub(super) fn white_noise<R: Rng + ?Sized>(img: &ImageBuffer, sigma: f64, rng: &mut R) -> ImageBuffer {
    let (w, h) = img.dims();
    ImageBuffer::from_vec(w, h, add_gaussian(img.as_slice(), sigma, rng)).expect("same dims")
}

/// Gaussian noise added independently to Y, Cb and Cr.
pub(super) fn white_noise_cc<R: Rng + ?Sized>(img: &ImageBuffer, sigma: f64, rng: &mut R) -> ImageBuffer {
    let mut ycc = rgb_to_ycbcr(img);
    for plane in ycc.planes.iter_mut() {
        *plane = add_gaussian(plane, sigma, rng);
    }
    ycbcr_to_rgb(&ycc)
}

/// Salt-and-pepper noise; each sample is replaced with probability `p`.
pub(super) fn impulse_noise<R: Rng + ?Sized>(img: &ImageBuffer, p: f64, rng: &mut R) -> ImageBuffer {
    img_map_with(img, |v| {
        let hit: f64 = rng.random();
        let salt: bool = rng.random();
        if hit < p {
            if salt {
                1.0
            } else {
                0.0
            }
        } else {
            v
        }
    })
}

/// Speckle noise `x * (1 + n)`, `n ~ N(0, sigma)`.
pub(super) fn multiplicative_noise<R: Rng + ?Sized>(img: &ImageBuffer, sigma: f64, rng: &mut R) -> ImageBuffer {
    img_map_with(img, |v| {
        let z: f64 = rng.sample(StandardNormal);
        (v as f64 * (1.0 + sigma * z)) as f32
    })
}

fn img_map_with(img: &ImageBuffer, mut f: impl FnMut(f32) -> f32) -> ImageBuffer {
    let (w, h) = img.dims();
    let data = img.as_slice().iter().map(|&v| f(v)).collect();
    ImageBuffer::from_vec(w, h, data).expect("same dims")
}
