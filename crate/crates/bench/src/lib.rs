//! Deterministic inputs for the kernel benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seamforge_core::{BitDepth, BitGrid, RasterImage};

/// RGB noise over a smooth gradient, so seams have structure to follow.
pub fn textured(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RasterImage::from_fn(w, h, 3, BitDepth::Eight, |r, c, k| {
        let base = 0.5 + 0.3 * ((r as f64 * 0.05 + c as f64 * 0.08 + k as f64).sin());
        (base + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0)
    })
    .expect("samples are clamped to the unit range")
}

/// Roughly `density` of the pixels set.
pub fn random_mask(w: usize, h: usize, density: f64, seed: u64) -> BitGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitGrid::from_fn(w, h, |_, _| rng.random_bool(density))
}

/// A vertical seam-like band, jittered by one column per row.
pub fn seam_band(w: usize, h: usize, col: usize, seed: u64) -> BitGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<usize> = (0..h).map(|_| (col + rng.random_range(0..3)).min(w - 1)).collect();
    BitGrid::from_fn(w, h, |r, c| c == cols[r])
}
