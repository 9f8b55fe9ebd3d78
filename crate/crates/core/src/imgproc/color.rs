use super::ImageBuffer;
use crate::error::{Error, Result};

/// Three unconstrained planes, used for color spaces whose values leave `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelImage {
    pub width: usize,
    pub height: usize,
    pub planes: [Vec<f32>; 3],
}

impl ChannelImage {
    pub fn new(width: usize, height: usize, planes: [Vec<f32>; 3]) -> Result<Self> {
        if planes.iter().any(|p| p.len() != width * height) {
            return Err(Error::invalid("plane length does not match dimensions"));
        }
        Ok(Self { width, height, planes })
    }

    #[inline]
    pub fn get(&self, i: usize) -> [f32; 3] {
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }
}

fn map_pixels(img: &ImageBuffer, f: impl Fn([f64; 3]) -> [f64; 3]) -> ChannelImage {
    let n = img.width() * img.height();
    let mut planes = [vec![0f32; n], vec![0f32; n], vec![0f32; n]];
    for (i, px) in img.as_slice().chunks_exact(3).enumerate() {
        let out = f([px[0] as f64, px[1] as f64, px[2] as f64]);
        for c in 0..3 {
            planes[c][i] = out[c] as f32;
        }
    }
    ChannelImage { width: img.width(), height: img.height(), planes }
}

fn unmap_pixels(ch: &ChannelImage, f: impl Fn([f64; 3]) -> [f64; 3]) -> ImageBuffer {
    let n = ch.width * ch.height;
    let mut data = Vec::with_capacity(3 * n);
    for i in 0..n {
        let [a, b, c] = ch.get(i);
        data.extend(f([a as f64, b as f64, c as f64]).map(|v| v as f32));
    }
    ImageBuffer::from_vec(ch.width, ch.height, data).expect("dimensions preserved")
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Full-range ITU-R BT.601 YCbCr; chroma centred at 0.5.
pub fn rgb_to_ycbcr(img: &ImageBuffer) -> ChannelImage {
    map_pixels(img, |[r, g, b]| {
        let y = KR * r + KG * g + KB * b;
        [y, 0.5 + (b - y) / (2.0 * (1.0 - KB)), 0.5 + (r - y) / (2.0 * (1.0 - KR))]
    })
}

pub fn ycbcr_to_rgb(ycc: &ChannelImage) -> ImageBuffer {
    unmap_pixels(ycc, ycbcr_inverse)
}

pub(crate) fn ycbcr_inverse([y, cb, cr]: [f64; 3]) -> [f64; 3] {
    let r = y + 2.0 * (1.0 - KR) * (cr - 0.5);
    let b = y + 2.0 * (1.0 - KB) * (cb - 0.5);
    let g = (y - KR * r - KB * b) / KG;
    [r, g, b]
}

/// HSV with hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(img: &ImageBuffer) -> ChannelImage {
    map_pixels(img, |[r, g, b]| {
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let h = if delta == 0.0 {
            0.0
        } else if max == r {
            60.0 * ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        let s = if max == 0.0 { 0.0 } else { delta / max };
        [h, s, max]
    })
}

pub fn hsv_to_rgb(hsv: &ChannelImage) -> ImageBuffer {
    unmap_pixels(hsv, |[h, s, v]| {
        let c = v * s;
        let hp = h.rem_euclid(360.0) / 60.0;
        let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
        let (r, g, b) = match hp as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = v - c;
        [r + m, g + m, b + m]
    })
}

const WHITE_D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];
const LAB_EPS: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.max(0.0).powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPS {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > LAB_EPS {
        t
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

/// CIE 1976 L*a*b* relative to D65; L in `[0, 100]`.
pub fn rgb_to_lab(img: &ImageBuffer) -> ChannelImage {
    map_pixels(img, |[r, g, b]| {
        let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
        let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
        let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
        let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
        let fx = lab_f(x / WHITE_D65[0]);
        let fy = lab_f(y / WHITE_D65[1]);
        let fz = lab_f(z / WHITE_D65[2]);
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
    })
}

/// Inverse of [`rgb_to_lab`]; out-of-gamut colors are clamped.
pub fn lab_to_rgb(lab: &ChannelImage) -> ImageBuffer {
    unmap_pixels(lab, |[l, a, b]| {
        let fy = (l + 16.0) / 116.0;
        let fx = fy + a / 500.0;
        let fz = fy - b / 200.0;
        let x = WHITE_D65[0] * lab_f_inv(fx);
        let y = WHITE_D65[1] * lab_f_inv(fy);
        let z = WHITE_D65[2] * lab_f_inv(fz);
        let r = 3.240_454_2 * x - 1.537_138_5 * y - 0.498_531_4 * z;
        let g = -0.969_266_0 * x + 1.876_010_8 * y + 0.041_556_0 * z;
        let b = 0.055_643_4 * x - 0.204_025_9 * y + 1.057_225_2 * z;
        [linear_to_srgb(r), linear_to_srgb(g), linear_to_srgb(b)]
    })
}
