use super::ImageBuffer;
use crate::error::{Error, Result};

/// Dense 2-D convolution kernel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    weights: Vec<f32>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, weights: Vec<f32>) -> Result<Self> {
        if width % 2 == 0 || height % 2 == 0 {
            return Err(Error::invalid(format!("kernel dimensions must be odd, got {width}x{height}")));
        }
        if weights.len() != width * height {
            return Err(Error::invalid("kernel weight count does not match dimensions"));
        }
        Ok(Self { width, height, weights })
    }

    /// Rescales weights to sum to one. No-op for zero-sum kernels.
    pub fn normalized(mut self) -> Self {
        let sum: f32 = self.weights.iter().sum();
        if sum != 0.0 {
            self.weights.iter_mut().for_each(|w| *w /= sum);
        }
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }
}

/// Reflect-101 border index (`dcb|abcd|cba`).
#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Correlates a single plane with `kernel` using reflect-101 borders. No clamping.
pub fn convolve_plane(plane: &[f32], width: usize, height: usize, kernel: &Kernel) -> Vec<f32> {
    let rx = (kernel.width / 2) as isize;
    let ry = (kernel.height / 2) as isize;
    let mut out = vec![0f32; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0f32;
            for ky in 0..kernel.height {
                let sy = reflect101(y as isize + ky as isize - ry, height);
                let row = &plane[sy * width..(sy + 1) * width];
                let krow = &kernel.weights[ky * kernel.width..(ky + 1) * kernel.width];
                for (kx, &w) in krow.iter().enumerate() {
                    if w != 0.0 {
                        acc += w * row[reflect101(x as isize + kx as isize - rx, width)];
                    }
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Per-channel 2-D convolution with reflect-101 borders.
///
/// The kernel is applied as a correlation; flip it beforehand if true convolution
/// matters (all kernels used here are symmetric up to the motion-blur line).
pub fn convolve2d(img: &ImageBuffer, kernel: &Kernel) -> ImageBuffer {
    let (w, h) = img.dims();
    let planes: Vec<Vec<f32>> = (0..3).map(|c| convolve_plane(&img.channel(c), w, h, kernel)).collect();
    ImageBuffer::from_planes(w, h, [&planes[0], &planes[1], &planes[2]]).expect("dimensions preserved")
}

/// Normalized 1-D Gaussian with radius `ceil(3 sigma)`.
pub fn gaussian_kernel_1d(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k.into_iter().map(|v| v as f32).collect()
}

/// Separable Gaussian blur of a plane with reflect-101 borders.
pub fn separable_blur_plane(plane: &[f32], width: usize, height: usize, sigma: f64) -> Vec<f32> {
    let k = gaussian_kernel_1d(sigma);
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0f32; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0f32;
            for (i, &w) in k.iter().enumerate() {
                acc += w * row[reflect101(x as isize + i as isize - r, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0f32; plane.len()];
    for y in 0..height {
        for (i, &w) in k.iter().enumerate() {
            let sy = reflect101(y as isize + i as isize - r, height);
            let src = &tmp[sy * width..(sy + 1) * width];
            let dst = &mut out[y * width..(y + 1) * width];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}
