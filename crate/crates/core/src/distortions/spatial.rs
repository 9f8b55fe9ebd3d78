use rand::Rng;

use super::otsu::quantize_plane;
use crate::error::Result;
use crate::imgproc::{resize, ImageBuffer, ResizeMethod};

const PATCH: usize = 16;
const PATCH_REACH: i64 = 16;

pub(super) fn jitter<R: Rng + ?Sized>(img: &ImageBuffer, displacement: f64, rng: &mut R) -> ImageBuffer {
    let (w, h) = img.dims();
    let src = img.as_slice();
    let mut data = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let ux: f64 = rng.random_range(-1.0..=1.0);
            let uy: f64 = rng.random_range(-1.0..=1.0);
            let sx = (x as isize + (ux * displacement).round() as isize).clamp(0, w as isize - 1) as usize;
            let sy = (y as isize + (uy * displacement).round() as isize).clamp(0, h as isize - 1) as usize;
            let i = 3 * (sy * w + sx);
            data.extend_from_slice(&src[i..i + 3]);
        }
    }
    ImageBuffer::from_vec(w, h, data).expect("same dims")
}

/// Copies `patches` random 16x16 blocks of the original to nearby positions.
pub(super) fn non_eccentricity_patch<R: Rng + ?Sized>(img: &ImageBuffer, patches: f64, rng: &mut R) -> ImageBuffer {
    let (w, h) = img.dims();
    let pw = PATCH.min(w);
    let ph = PATCH.min(h);
    let src = img.as_slice();
    let mut out = src.to_vec();
    for _ in 0..patches.round() as usize {
        let sx = rng.random_range(0..=w - pw);
        let sy = rng.random_range(0..=h - ph);
        let dx = rng.random_range(-PATCH_REACH..=PATCH_REACH);
        let dy = rng.random_range(-PATCH_REACH..=PATCH_REACH);
        let tx = (sx as i64 + dx).clamp(0, (w - pw) as i64) as usize;
        let ty = (sy as i64 + dy).clamp(0, (h - ph) as i64) as usize;
        for row in 0..ph {
            let s = 3 * ((sy + row) * w + sx);
            let t = 3 * ((ty + row) * w + tx);
            out[t..t + 3 * pw].copy_from_slice(&src[s..s + 3 * pw]);
        }
    }
    ImageBuffer::from_vec(w, h, out).expect("same dims")
}

pub(super) fn pixelate(img: &ImageBuffer, factor: f64) -> Result<ImageBuffer> {
    let (w, h) = img.dims();
    let sw = ((w as f64 * factor).round() as usize).max(1);
    let sh = ((h as f64 * factor).round() as usize).max(1);
    let small = resize(img, sw, sh, ResizeMethod::Nearest)?;
    resize(&small, w, h, ResizeMethod::Nearest)
}

pub(super) fn quantization(img: &ImageBuffer, classes: f64) -> ImageBuffer {
    let (w, h) = img.dims();
    let classes = classes.round() as usize;
    let planes: Vec<Vec<f32>> = (0..3).map(|c| quantize_plane(&img.channel(c), classes)).collect();
    ImageBuffer::from_planes(w, h, [&planes[0], &planes[1], &planes[2]]).expect("same dims")
}

/// Overlays uniformly colored squares with side 10% of the shorter image edge.
pub(super) fn color_block<R: Rng + ?Sized>(img: &ImageBuffer, blocks: f64, rng: &mut R) -> ImageBuffer {
    let (w, h) = img.dims();
    let side = ((w.min(h) as f64 * 0.1).round() as usize).max(1);
    let mut out = img.as_slice().to_vec();
    for _ in 0..blocks.round() as usize {
        let x0 = rng.random_range(0..=w - side);
        let y0 = rng.random_range(0..=h - side);
        let color: [f32; 3] = [rng.random(), rng.random(), rng.random()];
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                let i = 3 * (y * w + x);
                out[i..i + 3].copy_from_slice(&color);
            }
        }
    }
    ImageBuffer::from_vec(w, h, out).expect("same dims")
}
