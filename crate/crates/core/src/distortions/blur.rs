use rand::Rng;

use crate::imgproc::{convolve2d, separable_blur_plane, ImageBuffer, Kernel};

pub(crate) fn blur_planes(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let (w, h) = img.dims();
    let planes: Vec<Vec<f32>> = (0..3).map(|c| separable_blur_plane(&img.channel(c), w, h, sigma)).collect();
    ImageBuffer::from_planes(w, h, [&planes[0], &planes[1], &planes[2]]).expect("same dims")
}

pub(super) fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    blur_planes(img, sigma)
}

/// Normalized disk of the given radius.
pub(crate) fn disk_kernel(radius: usize) -> Kernel {
    let n = 2 * radius + 1;
    let r = radius as isize;
    let r2 = (radius * radius) as isize;
    let weights = (0..n * n)
        .map(|i| {
            let dy = (i / n) as isize - r;
            let dx = (i % n) as isize - r;
            if dx * dx + dy * dy <= r2 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Kernel::new(n, n, weights).expect("odd kernel").normalized()
}

pub(super) fn lens_blur(img: &ImageBuffer, radius: f64) -> ImageBuffer {
    convolve2d(img, &disk_kernel(radius.round() as usize))
}

/// A normalized line of `length` taps through the kernel centre at `angle` radians.
pub(crate) fn line_kernel(length: usize, angle: f64) -> Kernel {
    let n = length;
    let c = (n / 2) as f64;
    let mut weights = vec![0f32; n * n];
    let (dy, dx) = angle.sin_cos();
    let steps = 4 * n;
    for s in 0..=steps {
        let t = -c + 2.0 * c * s as f64 / steps as f64;
        let x = (c + t * dx).round() as usize;
        let y = (c + t * dy).round() as usize;
        weights[y.min(n - 1) * n + x.min(n - 1)] = 1.0;
    }
    Kernel::new(n, n, weights).expect("odd kernel").normalized()
}

pub(super) fn motion_blur<R: Rng + ?Sized>(img: &ImageBuffer, length: f64, rng: &mut R) -> ImageBuffer {
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    convolve2d(img, &line_kernel(length.round() as usize, angle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_is_symmetric_and_normalized() {
        let k = disk_kernel(2);
        assert_eq!(k.width(), 5);
        let sum: f32 = k.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
        // corners of a radius-2 disk are outside
        assert_eq!(k.weights()[0], 0.0);
        assert!(k.weights()[12] > 0.0);
        let taps = k.weights().iter().filter(|&&w| w > 0.0).count();
        assert_eq!(taps, 13);
    }

    #[test]
    fn horizontal_line_kernel() {
        let k = line_kernel(5, 0.0);
        let nonzero: Vec<usize> = k.weights().iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i).collect();
        assert_eq!(nonzero, vec![10, 11, 12, 13, 14]);
        let d = line_kernel(5, std::f64::consts::FRAC_PI_4);
        let taps: Vec<usize> = d.weights().iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i).collect();
        assert!(taps.len() >= 3);
        assert!(taps.iter().all(|i| i % 5 == i / 5), "{taps:?}");
    }
}
