//! Deterministic procedural test images: layered value noise, smooth colour
//! gradients and random shapes with hard edges.

use rand::Rng;

use crate::imgproc::ImageBuffer;
use crate::rng::{derive_seed, rng_from_seed};

fn smoothstep(t: f32) -> f32 {
    t * t * (3.0 - 2.0 * t)
}

/// Bilinearly interpolated lattice noise at one scale.
fn value_noise<R: Rng>(w: usize, h: usize, cell: usize, rng: &mut R) -> Vec<f32> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f32> = (0..gw * gh).map(|_| rng.random::<f32>()).collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let gy = y / cell;
        let ty = smoothstep((y % cell) as f32 / cell as f32);
        for x in 0..w {
            let gx = x / cell;
            let tx = smoothstep((x % cell) as f32 / cell as f32);
            let g = |i: usize, j: usize| grid[j * gw + i];
            let top = g(gx, gy) * (1.0 - tx) + g(gx + 1, gy) * tx;
            let bot = g(gx, gy + 1) * (1.0 - tx) + g(gx + 1, gy + 1) * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

pub fn procedural_image(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = rng_from_seed(derive_seed(0x5eed_c0de, seed));
    let n = width * height;
    let base: [f32; 3] = [rng.random(), rng.random(), rng.random()];
    let tint: [f32; 3] = [rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)];
    let angle: f32 = rng.random_range(0.0..std::f32::consts::TAU);
    let (sa, ca) = angle.sin_cos();

    let mut planes: Vec<Vec<f32>> = Vec::with_capacity(3);
    for c in 0..3 {
        let mut plane = vec![0.0f32; n];
        let mut amp = 0.35;
        for cell in [48usize, 16, 5] {
            let cell = cell.min(width.max(2) / 2).max(2);
            let noise = value_noise(width, height, cell, &mut rng);
            for (p, v) in plane.iter_mut().zip(noise) {
                *p += amp * (v - 0.5);
            }
            amp *= 0.5;
        }
        for y in 0..height {
            for x in 0..width {
                let t = (ca * x as f32 / width as f32 + sa * y as f32 / height as f32) * 0.5 + 0.25;
                plane[y * width + x] += base[c] * 0.6 + 0.2 + tint[c] * (t - 0.5);
            }
        }
        planes.push(plane);
    }

    let shapes = rng.random_range(3..9);
    for _ in 0..shapes {
        let colour: [f32; 3] = [rng.random(), rng.random(), rng.random()];
        let cx = rng.random_range(0.0..width as f32);
        let cy = rng.random_range(0.0..height as f32);
        let r = rng.random_range(0.05..0.3) * width.min(height) as f32;
        let circle = rng.random_bool(0.5);
        let alpha = rng.random_range(0.5..1.0f32);
        for y in 0..height {
            for x in 0..width {
                let dx = x as f32 - cx;
                let dy = y as f32 - cy;
                let inside = if circle { dx * dx + dy * dy <= r * r } else { dx.abs() <= r && dy.abs() <= 0.6 * r };
                if inside {
                    let i = y * width + x;
                    for c in 0..3 {
                        planes[c][i] = (1.0 - alpha) * planes[c][i] + alpha * colour[c];
                    }
                }
            }
        }
    }

    ImageBuffer::from_planes(width, height, [&planes[0], &planes[1], &planes[2]]).expect("planes sized to the image")
}

/// `count` images seeded `seed, seed + 1, ...`.
pub fn procedural_corpus(count: usize, width: usize, height: usize, seed: u64) -> Vec<ImageBuffer> {
    (0..count as u64).map(|i| procedural_image(width, height, seed + i)).collect()
}
