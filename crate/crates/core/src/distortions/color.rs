use rand::Rng;

use crate::imgproc::{hsv_to_rgb, lab_to_rgb, rgb_to_hsv, rgb_to_lab, separable_blur_plane, ImageBuffer};

/// Blurs the chroma (a, b) planes in LAB.
pub(super) fn color_diffusion(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let mut lab = rgb_to_lab(img);
    let (w, h) = img.dims();
    for c in 1..3 {
        lab.planes[c] = separable_blur_plane(&lab.planes[c], w, h, sigma);
    }
    lab_to_rgb(&lab)
}

/// Sobel gradient magnitude scaled so its maximum is one (all zeros for flat input).
pub(crate) fn normalized_gradient(plane: &[f32], w: usize, h: usize) -> Vec<f32> {
    let at = |x: isize, y: isize| -> f32 {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        plane[y * w + x]
    };
    let mut mag = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            // paired differences keep flat regions at exactly zero
            let gx = (at(x + 1, y - 1) - at(x - 1, y - 1))
                + 2.0 * (at(x + 1, y) - at(x - 1, y))
                + (at(x + 1, y + 1) - at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) - at(x - 1, y - 1))
                + 2.0 * (at(x, y + 1) - at(x, y - 1))
                + (at(x + 1, y + 1) - at(x + 1, y - 1));
            mag.push((gx * gx + gy * gy).sqrt());
        }
    }
    let max = mag.iter().copied().fold(0.0f32, f32::max);
    if max > 0.0 {
        mag.iter_mut().for_each(|m| *m /= max);
    }
    mag
}

/// Translates the green channel and blends it back where the original has edges.
pub(super) fn color_shift<R: Rng + ?Sized>(img: &ImageBuffer, shift: f64, rng: &mut R) -> ImageBuffer {
    let (w, h) = img.dims();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let dx = (shift * angle.cos()).round() as isize;
    let dy = (shift * angle.sin()).round() as isize;
    // the blend band around edges widens with the shift
    let spread = separable_blur_plane(&normalized_gradient(&img.luma(), w, h), w, h, 0.5 * shift);
    let peak = spread.iter().copied().fold(0.0f32, f32::max);
    let weight: Vec<f32> = spread.iter().map(|&v| if peak > 0.0 { v / peak } else { 0.0 }).collect();
    let src = img.as_slice();
    let mut out = src.to_vec();
    for y in 0..h {
        for x in 0..w {
            let sx = (x as isize - dx).clamp(0, w as isize - 1) as usize;
            let sy = (y as isize - dy).clamp(0, h as isize - 1) as usize;
            let i = y * w + x;
            let g = src[3 * i + 1];
            let shifted = src[3 * (sy * w + sx) + 1];
            out[3 * i + 1] = g + weight[i] * (shifted - g);
        }
    }
    ImageBuffer::from_vec(w, h, out).expect("same dims")
}

pub(super) fn saturation_hsv(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    let mut hsv = rgb_to_hsv(img);
    let f = factor as f32;
    hsv.planes[1].iter_mut().for_each(|s| *s = (*s * f).clamp(0.0, 1.0));
    hsv_to_rgb(&hsv)
}

pub(super) fn saturation_lab(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    let mut lab = rgb_to_lab(img);
    let f = factor as f32;
    for c in 1..3 {
        lab.planes[c].iter_mut().for_each(|v| *v *= f);
    }
    lab_to_rgb(&lab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn flat_image_has_zero_gradient_and_no_shift() {
        let img = ImageBuffer::filled(12, 12, [0.2, 0.7, 0.4]).unwrap();
        assert!(normalized_gradient(&img.luma(), 12, 12).iter().all(|&g| g == 0.0));
        assert_eq!(color_shift(&img, 8.0, &mut rng_from_seed(1)), img);
    }

    #[test]
    fn color_shift_touches_only_green() {
        let img = ImageBuffer::from_fn(32, 32, |x, y| {
            let v = if (x / 8 + y / 8) % 2 == 0 { 0.9 } else { 0.1 };
            [v, 1.0 - v, 0.5]
        })
        .unwrap();
        let out = color_shift(&img, 4.0, &mut rng_from_seed(2));
        for (a, b) in out.as_slice().chunks_exact(3).zip(img.as_slice().chunks_exact(3)) {
            assert_eq!(a[0], b[0]);
            assert_eq!(a[2], b[2]);
        }
        assert_ne!(out, img);
    }

    #[test]
    fn gray_is_fixed_under_lab_saturation() {
        let img = ImageBuffer::filled(4, 4, [0.5; 3]).unwrap();
        let out = saturation_lab(&img, 6.0);
        for (a, b) in out.as_slice().iter().zip(img.as_slice()) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
