use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::TileRegion;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileStrategy {
    /// `n` origins drawn uniformly; tiles may overlap.
    Random(usize),
    /// Row-major grid of disjoint tiles; leftover margins are dropped.
    NonOverlapping,
}

/// Every seeded draw in the crate goes through ChaCha8 keyed by `seed`,
/// with `stream` separating independent consumers.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for an independent consumer.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    seeded_rng(seed, stream).next_u64()
}

pub fn extract_tiles(
    (width, height): (usize, usize),
    size: usize,
    strategy: TileStrategy,
    seed: u64,
) -> Result<Vec<TileRegion>> {
    if size == 0 || size > width.min(height) {
        return Err(Error::InvalidArgument(format!(
            "tile size {size} does not fit a {width}x{height} image"
        )));
    }
    Ok(match strategy {
        TileStrategy::Random(n) => {
            let mut rng = seeded_rng(seed, 0);
            (0..n)
                .map(|_| {
                    let row = rng.random_range(0..=height - size);
                    let col = rng.random_range(0..=width - size);
                    TileRegion::new(row, col, size)
                })
                .collect()
        }
        TileStrategy::NonOverlapping => (0..height / size)
            .flat_map(|i| (0..width / size).map(move |j| TileRegion::new(i * size, j * size, size)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_tile() {
        let tiles = extract_tiles((512, 512), 512, TileStrategy::NonOverlapping, 0).unwrap();
        assert_eq!(tiles, vec![TileRegion::new(0, 0, 512)]);
    }

    #[test]
    fn grid_arithmetic() {
        let tiles = extract_tiles((1024, 1024), 512, TileStrategy::NonOverlapping, 0).unwrap();
        assert_eq!(tiles.len(), 4);
        assert_eq!(tiles[1], TileRegion::new(0, 512, 512));
        assert_eq!(
            extract_tiles((1100, 600), 512, TileStrategy::NonOverlapping, 0)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn oversized_tile_rejected() {
        assert!(extract_tiles((100, 50), 64, TileStrategy::Random(3), 0).is_err());
        assert!(extract_tiles((100, 50), 0, TileStrategy::NonOverlapping, 0).is_err());
    }

    proptest! {
        #[test]
        fn random_tiles_deterministic_and_in_bounds(w in 8usize..200, h in 8usize..200, n in 0usize..20, seed: u64) {
            let size = w.min(h) / 2 + 1;
            let a = extract_tiles((w, h), size, TileStrategy::Random(n), seed).unwrap();
            let b = extract_tiles((w, h), size, TileStrategy::Random(n), seed).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.len(), n);
            prop_assert!(a.iter().all(|t| t.fits(w, h)));
        }
    }
}
