//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seamforge_core::energy::{EnergyMap, ForwardCosts};
use seamforge_core::{BitDepth, RasterImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise_image(rng: &mut ChaCha8Rng, w: usize, h: usize, channels: usize) -> RasterImage {
    RasterImage::from_fn(w, h, channels, BitDepth::Eight, |_, _, _| {
        rng.random_range(0..=255u32) as f64 / 255.0
    })
    .unwrap()
}

/// Smooth gradients plus noise: structure for the energy, detail for JPEG.
pub fn textured_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RasterImage {
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    RasterImage::from_fn(w, h, 3, BitDepth::Eight, |r, c, k| {
        let wave = 0.5 + 0.25 * ((r as f64 * 0.21 + c as f64 * 0.13 + phase + k as f64).sin());
        let grain = rng.random_range(-0.2..0.2);
        ((wave + grain).clamp(0.0, 1.0) * 255.0).round() / 255.0
    })
    .unwrap()
}

/// Random 8-connected walk with every column in `lo..=hi`.
pub fn random_walk(rng: &mut ChaCha8Rng, h: usize, lo: usize, hi: usize) -> Vec<usize> {
    let mut c = rng.random_range(lo..=hi);
    (0..h)
        .map(|i| {
            if i > 0 {
                let step: i64 = rng.random_range(-1..=1);
                c = (c as i64 + step).clamp(lo as i64, hi as i64) as usize;
            }
            c
        })
        .collect()
}

/// Minimum over all `w * 3^(h-1)` 8-connected paths, enumerated depth-first.
///
/// Sums follow the same order as the table: `acc = e + acc`, or
/// `acc = e + (acc + C)` with forward costs and `e + C_U` on row 0.
pub fn brute_force_min(e: &EnergyMap, fc: Option<&ForwardCosts>) -> f64 {
    fn walk(e: &EnergyMap, fc: Option<&ForwardCosts>, r: usize, c: usize, acc: f64, best: &mut f64) {
        if r + 1 == e.height() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        let nr = r + 1;
        for nc in c.saturating_sub(1)..=(c + 1).min(e.width() - 1) {
            let next = match fc {
                None => e.get(nr, nc) + acc,
                Some(fc) => {
                    // Moving from column c to nc: the new pixel's predecessor sits at offset c - nc.
                    let cost = match c as isize - nc as isize {
                        -1 => fc.left.get(nr, nc),
                        0 => fc.up.get(nr, nc),
                        _ => fc.right.get(nr, nc),
                    };
                    e.get(nr, nc) + (acc + cost)
                }
            };
            walk(e, fc, nr, nc, next, best);
        }
    }
    let mut best = f64::INFINITY;
    for c in 0..e.width() {
        let start = match fc {
            None => e.get(0, c),
            Some(fc) => e.get(0, c) + fc.up.get(0, c),
        };
        walk(e, fc, 0, c, start, &mut best);
    }
    best
}

/// Cost of one given path, summed in table order.
pub fn path_cost(e: &EnergyMap, fc: Option<&ForwardCosts>, cols: &[usize]) -> f64 {
    let mut acc = match fc {
        None => e.get(0, cols[0]),
        Some(fc) => e.get(0, cols[0]) + fc.up.get(0, cols[0]),
    };
    for r in 1..cols.len() {
        let c = cols[r];
        acc = match fc {
            None => e.get(r, c) + acc,
            Some(fc) => {
                let cost = match cols[r - 1] as isize - c as isize {
                    -1 => fc.left.get(r, c),
                    0 => fc.up.get(r, c),
                    _ => fc.right.get(r, c),
                };
                e.get(r, c) + (acc + cost)
            }
        };
    }
    acc
}

pub fn verdict(id: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "[{}] criterion {id}: {name} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}
