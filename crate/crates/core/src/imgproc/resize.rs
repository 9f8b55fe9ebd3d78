use serde::{Deserialize, Serialize};

use super::ImageBuffer;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMethod {
    Nearest,
    Bilinear,
}

/// Resizes with half-pixel-centre sample alignment.
pub fn resize(img: &ImageBuffer, out_w: usize, out_h: usize, method: ResizeMethod) -> Result<ImageBuffer> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::invalid(format!("resize target must be non-empty, got {out_w}x{out_h}")));
    }
    let (w, h) = img.dims();
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let planes: Vec<Vec<f32>> = (0..3).map(|c| resize_plane(&img.channel(c), w, h, out_w, out_h, method)).collect();
    ImageBuffer::from_planes(out_w, out_h, [&planes[0], &planes[1], &planes[2]])
}

pub fn resize_plane(plane: &[f32], w: usize, h: usize, out_w: usize, out_h: usize, method: ResizeMethod) -> Vec<f32> {
    let sx = w as f64 / out_w as f64;
    let sy = h as f64 / out_h as f64;
    let mut out = Vec::with_capacity(out_w * out_h);
    match method {
        ResizeMethod::Nearest => {
            let xs: Vec<usize> = (0..out_w).map(|x| (((x as f64 + 0.5) * sx).floor() as usize).min(w - 1)).collect();
            for y in 0..out_h {
                let syi = (((y as f64 + 0.5) * sy).floor() as usize).min(h - 1);
                let row = &plane[syi * w..(syi + 1) * w];
                out.extend(xs.iter().map(|&xi| row[xi]));
            }
        }
        ResizeMethod::Bilinear => {
            let taps = |dst: usize, scale: f64, n: usize| -> (usize, usize, f32) {
                let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
                let i0 = src.floor() as usize;
                let i1 = (i0 + 1).min(n - 1);
                (i0, i1, (src - i0 as f64) as f32)
            };
            let xt: Vec<_> = (0..out_w).map(|x| taps(x, sx, w)).collect();
            for y in 0..out_h {
                let (y0, y1, fy) = taps(y, sy, h);
                let r0 = &plane[y0 * w..(y0 + 1) * w];
                let r1 = &plane[y1 * w..(y1 + 1) * w];
                for &(x0, x1, fx) in &xt {
                    let top = r0[x0] * (1.0 - fx) + r0[x1] * fx;
                    let bot = r1[x0] * (1.0 - fx) + r1[x1] * fx;
                    out.push(top * (1.0 - fy) + bot * fy);
                }
            }
        }
    }
    out
}
