use crate::imgproc::ImageBuffer;

/// Lifts midtones: `1 - (1 - x)^3`, endpoints fixed.
fn lift(x: f32) -> f32 {
    1.0 - (1.0 - x).powi(3)
}

/// Lowers midtones: `x^3`, endpoints fixed.
fn lower(x: f32) -> f32 {
    x.powi(3)
}

pub(super) fn brighten(img: &ImageBuffer, blend: f64) -> ImageBuffer {
    let t = blend as f32;
    img.map(|x| x + t * (lift(x) - x))
}

pub(super) fn darken(img: &ImageBuffer, blend: f64) -> ImageBuffer {
    let t = blend as f32;
    img.map(|x| x + t * (lower(x) - x))
}

pub(super) fn mean_shift(img: &ImageBuffer, shift: f64) -> ImageBuffer {
    let s = shift as f32;
    img.map(|x| x + s)
}
