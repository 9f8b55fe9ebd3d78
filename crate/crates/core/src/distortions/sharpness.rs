use crate::imgproc::{lab_to_rgb, rgb_to_lab, separable_blur_plane, ImageBuffer};

const UNSHARP_SIGMA: f64 = 1.0;

/// Unsharp masking of the LAB lightness channel.
pub(super) fn high_sharpen(img: &ImageBuffer, amount: f64) -> ImageBuffer {
    let (w, h) = img.dims();
    let mut lab = rgb_to_lab(img);
    let blurred = separable_blur_plane(&lab.planes[0], w, h, UNSHARP_SIGMA);
    let a = amount as f32;
    for (l, b) in lab.planes[0].iter_mut().zip(&blurred) {
        *l = (*l + a * (*l - b)).clamp(0.0, 100.0);
    }
    lab_to_rgb(&lab)
}

/// Symmetric power curve around mid-gray; larger exponents push values away from 0.5.
pub(super) fn nonlinear_contrast(img: &ImageBuffer, exponent: f64) -> ImageBuffer {
    let inv = (1.0 / exponent) as f32;
    img.map(|x| {
        let t = 2.0 * x - 1.0;
        0.5 + 0.5 * t.signum() * t.abs().powf(inv)
    })
}

/// Scales every sample toward the global image mean.
pub(super) fn linear_contrast(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    let data = img.as_slice();
    let mean = (data.iter().map(|&v| v as f64).sum::<f64>() / data.len() as f64) as f32;
    let f = factor as f32;
    img.map(|x| mean + f * (x - mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contrast_curves_fix_mid_gray() {
        let img = ImageBuffer::filled(3, 3, [0.5; 3]).unwrap();
        assert_eq!(nonlinear_contrast(&img, 2.0), img);
        assert_eq!(linear_contrast(&img, 0.3), img);
    }

    #[test]
    fn linear_contrast_halves_deviation() {
        let img = ImageBuffer::from_vec(1, 2, vec![0.2, 0.2, 0.2, 0.8, 0.8, 0.8]).unwrap();
        let out = linear_contrast(&img, 0.5);
        assert!((out.as_slice()[0] - 0.35).abs() < 1e-6);
        assert!((out.as_slice()[3] - 0.65).abs() < 1e-6);
    }

    #[test]
    fn sharpen_is_identity_on_flat_image() {
        let img = ImageBuffer::filled(10, 10, [0.3, 0.6, 0.2]).unwrap();
        let out = high_sharpen(&img, 12.0);
        for (a, b) in out.as_slice().iter().zip(img.as_slice()) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
