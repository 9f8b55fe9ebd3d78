//! Pixel-level primitives shared by the distortion kernels and the batch builder.
//!
//! Images are stored as interleaved RGB `f32` samples in `[0, 1]`. Every public
//! operation returning an [`ImageBuffer`] clamps once on the way out.

mod color;
mod filter;
mod io;
mod resize;

pub use color::{hsv_to_rgb, lab_to_rgb, rgb_to_hsv, rgb_to_lab, rgb_to_ycbcr, ycbcr_to_rgb, ChannelImage};
pub use filter::{convolve2d, convolve_plane, gaussian_kernel_1d, separable_blur_plane, Kernel};
pub use io::{decode_image, encode_png, load_image, save_png};
pub use resize::{resize, resize_plane, ResizeMethod};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An RGB image with channel values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Wraps interleaved RGB samples, clamping them into `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dimensions must be positive, got {width}x{height}")));
        }
        if data.len() != 3 * width * height {
            return Err(Error::invalid(format!(
                "expected {} samples for a {width}x{height} RGB image, got {}",
                3 * width * height,
                data.len()
            )));
        }
        clamp_unit(&mut data);
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Result<Self> {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::from_vec(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    /// Builds an image from 8-bit samples using `v / 255`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        Self::from_vec(width, height, data)
    }

    /// Quantizes to 8-bit samples using `round(v * 255)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Extracts one channel as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<f32> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    /// Applies `f` to every sample and clamps the result.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        let mut data: Vec<f32> = self.data.iter().map(|&v| f(v)).collect();
        clamp_unit(&mut data);
        Self { width: self.width, height: self.height, data }
    }

    /// Rebuilds an image from three planes, clamping into `[0, 1]`.
    pub fn from_planes(width: usize, height: usize, planes: [&[f32]; 3]) -> Result<Self> {
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(Error::invalid("plane length does not match dimensions"));
        }
        let mut data = Vec::with_capacity(3 * n);
        for i in 0..n {
            data.push(planes[0][i]);
            data.push(planes[1][i]);
            data.push(planes[2][i]);
        }
        Self::from_vec(width, height, data)
    }

    /// Rec. 601 luma plane.
    pub fn luma(&self) -> Vec<f32> {
        self.data.chunks_exact(3).map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect()
    }
}

fn clamp_unit(data: &mut [f32]) {
    for v in data {
        *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    }
}

/// Axis-aligned crop rectangle in pixel units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Self {
        Self { x0, y0, w, h }
    }

    fn check(&self, img: &ImageBuffer) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::invalid(format!("empty crop rect {self:?}")));
        }
        if self.x0 + self.w > img.width || self.y0 + self.h > img.height {
            return Err(Error::invalid(format!("crop rect {self:?} exceeds {}x{} image", img.width, img.height)));
        }
        Ok(())
    }
}

pub fn crop(img: &ImageBuffer, rect: Rect) -> Result<ImageBuffer> {
    rect.check(img)?;
    let mut data = Vec::with_capacity(3 * rect.w * rect.h);
    for y in rect.y0..rect.y0 + rect.h {
        let start = 3 * (y * img.width + rect.x0);
        data.extend_from_slice(&img.data[start..start + 3 * rect.w]);
    }
    ImageBuffer::from_vec(rect.w, rect.h, data)
}

/// Square crop of side `size` at an offset drawn uniformly from the valid range.
pub fn random_crop<R: Rng + ?Sized>(img: &ImageBuffer, size: usize, rng: &mut R) -> Result<(ImageBuffer, Rect)> {
    if size == 0 || img.width < size || img.height < size {
        return Err(Error::invalid(format!(
            "cannot take a {size}x{size} crop from a {}x{} image",
            img.width, img.height
        )));
    }
    let x0 = rng.random_range(0..=img.width - size);
    let y0 = rng.random_range(0..=img.height - size);
    let rect = Rect::new(x0, y0, size, size);
    Ok((crop(img, rect)?, rect))
}

/// Peak signal-to-noise ratio for unit-range images. Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!("psnr dimension mismatch: {:?} vs {:?}", a.dims(), b.dims())));
    }
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_clamps_and_validates() {
        let img = ImageBuffer::from_vec(1, 1, vec![-0.5, 0.5, 1.5]).unwrap();
        assert_eq!(img.as_slice(), &[0.0, 0.5, 1.0]);
        assert!(ImageBuffer::from_vec(2, 2, vec![0.0; 11]).is_err());
        assert!(ImageBuffer::from_vec(0, 2, vec![]).is_err());
    }

    #[test]
    fn rgb8_round_trip() {
        let bytes: Vec<u8> = (0..=255).cycle().take(3 * 16 * 16).collect();
        let img = ImageBuffer::from_rgb8(16, 16, &bytes).unwrap();
        assert_eq!(img.to_rgb8(), bytes);
    }

    #[test]
    fn full_rect_crop_is_identity() {
        let img = ImageBuffer::from_fn(7, 5, |x, y| [x as f32 / 7.0, y as f32 / 5.0, 0.3]).unwrap();
        let out = crop(&img, Rect::new(0, 0, 7, 5)).unwrap();
        assert_eq!(out, img);
        let sub = crop(&img, Rect::new(2, 1, 3, 2)).unwrap();
        assert_eq!(sub.pixel(0, 0), img.pixel(2, 1));
        assert_eq!(sub.pixel(2, 1), img.pixel(4, 2));
    }

    #[test]
    fn crop_rejects_out_of_bounds() {
        let img = ImageBuffer::filled(4, 4, [0.5; 3]).unwrap();
        assert!(crop(&img, Rect::new(2, 0, 3, 1)).is_err());
        assert!(crop(&img, Rect::new(0, 0, 0, 1)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_crop(&img, 5, &mut rng).is_err());
    }

    #[test]
    fn random_crop_is_seed_deterministic() {
        let img = ImageBuffer::filled(64, 48, [0.2; 3]).unwrap();
        let a = random_crop(&img, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap().1;
        let b = random_crop(&img, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap().1;
        assert_eq!(a, b);
    }

    #[test]
    fn psnr_reference_values() {
        let zeros = ImageBuffer::filled(3, 3, [0.0; 3]).unwrap();
        let ones = ImageBuffer::filled(3, 3, [1.0; 3]).unwrap();
        assert_eq!(psnr(&zeros, &zeros).unwrap(), f64::INFINITY);
        assert!((psnr(&zeros, &ones).unwrap() - 0.0).abs() < 1e-12);

        // every sample off by 0.1 -> MSE 0.01 -> 20 dB
        let a = ImageBuffer::filled(2, 2, [0.5; 3]).unwrap();
        let b = ImageBuffer::filled(2, 2, [0.6; 3]).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-4);

        let c = ImageBuffer::filled(2, 3, [0.5; 3]).unwrap();
        assert!(psnr(&a, &c).is_err());
    }
}
