//! A fixed 30-dimensional handcrafted descriptor of distortion statistics.
//!
//! | index  | feature                                             |
//! |--------|-----------------------------------------------------|
//! | 0..3   | RGB channel means                                   |
//! | 3..6   | RGB channel standard deviations                     |
//! | 6..8   | mean/std of the 3x3 luma range (local contrast)     |
//! | 8..16  | fraction of pixels per nonzero gradient-magnitude bin |
//! | 16     | mean squared Laplacian                              |
//! | 17     | colourfulness                                       |
//! | 18..21 | mean abs residual vs 2x down/up-sampled copy per channel |
//! | 21..25 | LAB a/b means and standard deviations (scaled by 1/100) |
//! | 25     | blockiness: 8-px boundary minus interior luma steps |
//! | 26..28 | HSV saturation mean and standard deviation          |
//! | 28     | distinct 8-bit luma values / 256                    |
//! | 29     | fraction of impulse outliers vs the 3x3 median      |

use crate::error::{Error, Result};
use crate::imgproc::{resize_plane, rgb_to_hsv, rgb_to_lab, ImageBuffer, ResizeMethod};

pub const FEATURE_DIM: usize = 30;
pub const MIN_PATCH: usize = 32;

const GRAD_EDGES: [f64; 8] = [0.0, 0.02, 0.05, 0.1, 0.2, 0.35, 0.55, 0.8];
const IMPULSE_THRESHOLD: f64 = 0.3;

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (mut n, mut sum) = (0usize, 0.0);
    for v in values.clone() {
        n += 1;
        sum += v;
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

struct Plane<'a> {
    data: &'a [f32],
    w: usize,
    h: usize,
}

impl Plane<'_> {
    /// Replicated-border access.
    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[y * self.w + x] as f64
    }

    fn neighbourhood(&self, x: isize, y: isize) -> [f64; 9] {
        let mut out = [0.0; 9];
        let mut k = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                out[k] = self.at(x + dx, y + dy);
                k += 1;
            }
        }
        out
    }
}

pub fn handcrafted_features(patch: &ImageBuffer) -> Result<Vec<f64>> {
    let (w, h) = patch.dims();
    if w < MIN_PATCH || h < MIN_PATCH {
        return Err(Error::invalid(format!("feature extraction needs at least {MIN_PATCH}x{MIN_PATCH}, got {w}x{h}")));
    }
    let n = w * h;
    let mut f = Vec::with_capacity(FEATURE_DIM);
    let data = patch.as_slice();
    let chan = |c: usize| data.iter().skip(c).step_by(3).map(|&v| v as f64);

    let stats: Vec<(f64, f64)> = (0..3).map(|c| mean_std(chan(c))).collect();
    f.extend(stats.iter().map(|s| s.0));
    f.extend(stats.iter().map(|s| s.1));

    let luma = patch.luma();
    let y = Plane { data: &luma, w, h };
    let mut range = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    let mut lap = 0.0;
    let mut impulses = 0usize;
    for yi in 0..h as isize {
        for xi in 0..w as isize {
            let nb = y.neighbourhood(xi, yi);
            let (lo, hi) = nb.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            range.push(hi - lo);
            let c = nb[4];
            let gx = 0.5 * (nb[5] - nb[3]);
            let gy = 0.5 * (nb[7] - nb[1]);
            grad.push((gx * gx + gy * gy).sqrt());
            let l = (c - nb[1]) + (c - nb[3]) + (c - nb[5]) + (c - nb[7]);
            lap += l * l;
            let mut sorted = nb;
            sorted.sort_by(f64::total_cmp);
            if (c - sorted[4]).abs() > IMPULSE_THRESHOLD {
                impulses += 1;
            }
        }
    }
    let (rm, rs) = mean_std(range.iter().copied());
    f.push(rm);
    f.push(rs);

    let mut hist = [0.0; 8];
    for &g in &grad {
        if g > 0.0 {
            let bin = GRAD_EDGES.partition_point(|&e| e < g) - 1;
            hist[bin] += 1.0;
        }
    }
    f.extend(hist.iter().map(|c| c / n as f64));
    f.push(lap / n as f64);

    let rg = (0..n).map(|i| data[3 * i] as f64 - data[3 * i + 1] as f64);
    let yb = (0..n).map(|i| 0.5 * (data[3 * i] as f64 + data[3 * i + 1] as f64) - data[3 * i + 2] as f64);
    let (mrg, srg) = mean_std(rg);
    let (myb, syb) = mean_std(yb);
    f.push((srg * srg + syb * syb).sqrt() + 0.3 * (mrg * mrg + myb * myb).sqrt());

    for c in 0..3 {
        let plane = patch.channel(c);
        let (sw, sh) = (w / 2, h / 2);
        let small = resize_plane(&plane, w, h, sw, sh, ResizeMethod::Bilinear);
        let up = resize_plane(&small, sw, sh, w, h, ResizeMethod::Bilinear);
        let res = plane.iter().zip(&up).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>();
        f.push(res / n as f64);
    }

    let lab = rgb_to_lab(patch);
    let (am, asd) = mean_std(lab.planes[1].iter().map(|&v| v as f64 / 100.0));
    let (bm, bsd) = mean_std(lab.planes[2].iter().map(|&v| v as f64 / 100.0));
    f.extend([am, asd, bm, bsd]);

    f.push(blockiness(&y));

    let hsv = rgb_to_hsv(patch);
    let (sm, ss) = mean_std(hsv.planes[1].iter().map(|&v| v as f64));
    f.push(sm);
    f.push(ss);

    let mut seen = [false; 256];
    for &v in &luma {
        seen[((v.clamp(0.0, 1.0) * 255.0).round() as usize).min(255)] = true;
    }
    f.push(seen.iter().filter(|&&s| s).count() as f64 / 256.0);
    f.push(impulses as f64 / n as f64);

    debug_assert_eq!(f.len(), FEATURE_DIM);
    Ok(f)
}

/// Mean absolute luma step across 8-pixel block boundaries minus the mean step
/// elsewhere, over both axes.
fn blockiness(y: &Plane<'_>) -> f64 {
    let (mut edge, mut ne) = (0.0, 0usize);
    let (mut inner, mut ni) = (0.0, 0usize);
    for yi in 0..y.h {
        for xi in 0..y.w - 1 {
            let d = (y.at(xi as isize + 1, yi as isize) - y.at(xi as isize, yi as isize)).abs();
            if (xi + 1) % 8 == 0 {
                edge += d;
                ne += 1;
            } else {
                inner += d;
                ni += 1;
            }
        }
    }
    for yi in 0..y.h - 1 {
        for xi in 0..y.w {
            let d = (y.at(xi as isize, yi as isize + 1) - y.at(xi as isize, yi as isize)).abs();
            if (yi + 1) % 8 == 0 {
                edge += d;
                ne += 1;
            } else {
                inner += d;
                ni += 1;
            }
        }
    }
    edge / ne.max(1) as f64 - inner / ni.max(1) as f64
}
