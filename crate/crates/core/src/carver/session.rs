//! A carving session threads image, provenance and edit history through a
//! sequence of seam removals, merges and insertions.

use serde::{Deserialize, Serialize};

use crate::carver::dp::{cumulative_matrix, optimal_seam, EnergyMode, Seam};
use crate::carver::edit::{insert_columns, merge_columns, remove_columns, RemovedPixel};
use crate::carver::provenance::{Origin, ProvenanceGrid};
use crate::energy::{apply_mask_bias, backward_energy, forward_costs, saliency_energy, EnergyMap};
use crate::error::{Error, Result};
use crate::raster::{BitGrid, RasterImage};

/// Which energy drives seam selection, and whether reduction removes or merges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Backward,
    Forward,
    Saliency,
    /// Forward-energy seams whose pixel pairs are merged instead of deleted.
    Merge,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Backward, Variant::Forward, Variant::Saliency, Variant::Merge];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Backward => "backward",
            Variant::Forward => "forward",
            Variant::Saliency => "saliency",
            Variant::Merge => "merge",
        }
    }

    fn selection(self) -> Variant {
        match self {
            Variant::Merge => Variant::Forward,
            v => v,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

/// Masks over the session's original image: removal pixels get the low
/// bias, protective pixels the high bias.
#[derive(Clone, Copy, Debug, Default)]
pub struct SeamBias<'a> {
    pub removal: Option<&'a BitGrid>,
    pub protective: Option<&'a BitGrid>,
}

impl<'a> SeamBias<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn protective(mask: Option<&'a BitGrid>) -> Self {
        Self {
            removal: None,
            protective: mask,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EditEvent {
    Removal {
        seam: Seam,
        cost: f64,
        pixels: Vec<RemovedPixel>,
    },
    Merge {
        seam: Seam,
        cost: f64,
        merged: Vec<Origin>,
    },
    Insertion {
        columns: Vec<usize>,
        inserted: Vec<Origin>,
    },
}

/// How many times each energy function was evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnergyStats {
    pub backward: usize,
    pub forward: usize,
    pub saliency: usize,
}

#[derive(Clone, Debug)]
pub struct CarveSession {
    image: RasterImage,
    provenance: ProvenanceGrid,
    original_dims: (usize, usize),
    history: Vec<EditEvent>,
    saliency: Option<EnergyMap>,
    stats: EnergyStats,
}

impl CarveSession {
    pub fn new(image: RasterImage) -> Self {
        let (w, h) = image.dims();
        Self {
            provenance: ProvenanceGrid::identity(w, h),
            original_dims: (w, h),
            image,
            history: Vec::new(),
            saliency: None,
            stats: EnergyStats::default(),
        }
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn provenance(&self) -> &ProvenanceGrid {
        &self.provenance
    }

    pub fn history(&self) -> &[EditEvent] {
        &self.history
    }

    pub fn energy_stats(&self) -> EnergyStats {
        self.stats
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn into_parts(self) -> (RasterImage, ProvenanceGrid, Vec<EditEvent>) {
        (self.image, self.provenance, self.history)
    }

    fn check_bias(&self, bias: &SeamBias) -> Result<()> {
        for mask in [bias.removal, bias.protective].into_iter().flatten() {
            if mask.dims() != self.original_dims {
                return Err(Error::dims(self.original_dims, mask.dims()));
            }
        }
        if let (Some(rm), Some(pm)) = (bias.removal, bias.protective) {
            let count = rm.overlap_count(pm)?;
            if count > 0 {
                return Err(Error::MaskOverlap { count });
            }
        }
        Ok(())
    }

    /// Optimal seam of the current image under `variant` and `bias`, with its cost.
    pub fn find_seam(&mut self, variant: Variant, bias: SeamBias) -> Result<(Seam, f64)> {
        self.check_bias(&bias)?;
        let mut removal = bias.removal.map(|m| self.provenance.project_mask(m));
        let mut protective = bias.protective.map(|m| self.provenance.project_mask(m));
        if variant == Variant::Merge {
            if let Some(guard) = protective.as_mut() {
                *guard = merge_guard(guard);
                if let Some(rm) = removal.as_mut() {
                    *rm = BitGrid::from_fn(rm.width(), rm.height(), |r, c| rm.get(r, c) && !guard.get(r, c));
                }
            }
        }
        let matrix = match variant.selection() {
            Variant::Backward => {
                self.stats.backward += 1;
                let e = apply_mask_bias(&backward_energy(&self.image), removal.as_ref(), protective.as_ref())?;
                cumulative_matrix(&e, EnergyMode::Backward, None)?
            }
            Variant::Saliency => {
                if self.saliency.is_none() {
                    self.stats.saliency += 1;
                    self.saliency = Some(saliency_energy(&self.image));
                }
                let map = self.saliency.as_ref().expect("cached above");
                let e = apply_mask_bias(map, removal.as_ref(), protective.as_ref())?;
                cumulative_matrix(&e, EnergyMode::Saliency, None)?
            }
            _ => {
                self.stats.forward += 1;
                let fc = forward_costs(&self.image);
                let (w, h) = self.image.dims();
                let e = apply_mask_bias(&EnergyMap::zeros(w, h), removal.as_ref(), protective.as_ref())?;
                cumulative_matrix(&e, EnergyMode::Forward, Some(&fc))?
            }
        };
        let cost = matrix.last_row_min().1;
        Ok((optimal_seam(&matrix), cost))
    }

    /// Finds and removes (or, for [`Variant::Merge`], merges) one seam.
    pub fn reduce_once(&mut self, variant: Variant, bias: SeamBias) -> Result<Seam> {
        if self.width() < 2 {
            return Err(Error::Degenerate("image is already 1 pixel wide".into()));
        }
        let (seam, cost) = self.find_seam(variant, bias)?;
        let prov = std::mem::replace(&mut self.provenance, ProvenanceGrid::identity(0, 0));
        if variant == Variant::Merge {
            let (img, prov, _, merged) = merge_columns(&self.image, prov, seam.columns())?;
            self.image = img;
            self.provenance = prov;
            self.saliency = None;
            self.history.push(EditEvent::Merge {
                seam: seam.clone(),
                cost,
                merged,
            });
        } else {
            let (img, prov, pixels) = remove_columns(&self.image, prov, seam.columns())?;
            self.image = img;
            self.provenance = prov;
            if let Some(map) = &self.saliency {
                self.saliency = Some(map.remove_columns(seam.columns())?);
            }
            self.history.push(EditEvent::Removal {
                seam: seam.clone(),
                cost,
                pixels,
            });
        }
        Ok(seam)
    }

    /// Removes `k` successive optimal seams. Requires `k < width`.
    pub fn reduce(&mut self, k: usize, variant: Variant, bias: SeamBias) -> Result<Vec<Seam>> {
        if k >= self.width() {
            return Err(Error::Infeasible(format!(
                "cannot remove {k} seams from width {}",
                self.width()
            )));
        }
        (0..k).map(|_| self.reduce_once(variant, bias)).collect()
    }

    /// Removes seams until no pixel of `removal` survives. Returns the count.
    pub fn reduce_until_cleared(
        &mut self,
        variant: Variant,
        removal: &BitGrid,
        protective: Option<&BitGrid>,
    ) -> Result<usize> {
        let bias = SeamBias {
            removal: Some(removal),
            protective,
        };
        self.check_bias(&bias)?;
        let mut count = 0;
        while self.provenance.contains_any(removal) {
            if self.width() < 2 {
                return Err(Error::Infeasible(
                    "removal mask pixels remain after the width was exhausted".into(),
                ));
            }
            self.reduce_once(variant, bias)?;
            count += 1;
        }
        Ok(count)
    }

    /// Inserts `k` seams chosen in one batch by successive removal on a
    /// scratch copy. Requires `k < width`.
    pub fn enlarge_batch(&mut self, k: usize, variant: Variant, bias: SeamBias) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        if k >= self.width() {
            return Err(Error::Infeasible(format!(
                "cannot select {k} disjoint seams in width {}",
                self.width()
            )));
        }
        self.check_bias(&bias)?;
        let removal = bias.removal.map(|m| self.provenance.project_mask(m));
        let protective = bias.protective.map(|m| self.provenance.project_mask(m));
        let mut scratch = CarveSession::new(self.image.clone());
        scratch.reduce(
            k,
            variant.selection(),
            SeamBias {
                removal: removal.as_ref(),
                protective: protective.as_ref(),
            },
        )?;

        // Scratch origins are columns of the current image.
        let selected: Vec<Vec<usize>> = scratch
            .history
            .iter()
            .map(|event| match event {
                EditEvent::Removal { pixels, .. } => pixels
                    .iter()
                    .map(|p| p.origin.original().expect("scratch only removes").1)
                    .collect(),
                _ => unreachable!("scratch selection only removes"),
            })
            .collect();

        for (j, seam) in selected.iter().enumerate() {
            let shifted: Vec<usize> = seam
                .iter()
                .enumerate()
                .map(|(r, &c)| c + selected[..j].iter().filter(|prev| prev[r] < c).count())
                .collect();
            let prov = std::mem::replace(&mut self.provenance, ProvenanceGrid::identity(0, 0));
            let (img, prov, _, inserted) = insert_columns(&self.image, prov, &shifted)?;
            self.image = img;
            self.provenance = prov;
            self.history.push(EditEvent::Insertion {
                columns: shifted,
                inserted,
            });
        }
        self.saliency = None;
        Ok(())
    }

    /// Inserts `k` seams, splitting into batches when `k` reaches the width.
    pub fn enlarge(&mut self, k: usize, variant: Variant, bias: SeamBias) -> Result<()> {
        let mut remaining = k;
        while remaining > 0 {
            if self.width() < 2 {
                return Err(Error::Degenerate("seam insertion needs width >= 2".into()));
            }
            let batch = remaining.min(self.width() - 1);
            self.enlarge_batch(batch, variant, bias)?;
            remaining -= batch;
        }
        Ok(())
    }

    /// Current columns of the pixels added by each insertion event.
    pub fn inserted_paths(&self) -> Result<Vec<Vec<usize>>> {
        let positions = self.provenance.positions()?;
        self.history
            .iter()
            .filter_map(|e| match e {
                EditEvent::Insertion { inserted, .. } => Some(inserted),
                _ => None,
            })
            .map(|inserted| {
                inserted
                    .iter()
                    .map(|o| {
                        positions.get(o).map(|&(_, c)| c).ok_or_else(|| {
                            Error::InconsistentProvenance(format!("inserted pixel {o:?} no longer present"))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// A merge at column `c` also consumes `c + 1` (or `c - 1` at the last
/// column), so a pixel whose partner is protected is protected too.
fn merge_guard(protective: &BitGrid) -> BitGrid {
    let w = protective.width();
    BitGrid::from_fn(w, protective.height(), |r, c| {
        protective.get(r, c)
            || (c + 1 < w && protective.get(r, c + 1))
            || (w >= 2 && c == w - 1 && protective.get(r, w - 2))
    })
}

/// Removes `k` optimal seams from `img`, returning the seams in removal order
/// (each in the coordinates of the image it was removed from).
pub fn remove_k_seams(
    img: &RasterImage,
    k: usize,
    variant: Variant,
    removal: Option<&BitGrid>,
    protective: Option<&BitGrid>,
) -> Result<(RasterImage, Vec<Seam>, ProvenanceGrid)> {
    let mut session = CarveSession::new(img.clone());
    let seams = session.reduce(k, variant, SeamBias { removal, protective })?;
    let (image, prov, _) = session.into_parts();
    Ok((image, seams, prov))
}

/// Inserts `k` averaged seams in one batch. Returns the enlarged image and
/// the final columns of each inserted seam, lowest cost first.
pub fn insert_k_seams(
    img: &RasterImage,
    k: usize,
    variant: Variant,
    protective: Option<&BitGrid>,
) -> Result<(RasterImage, Vec<Vec<usize>>)> {
    let mut session = CarveSession::new(img.clone());
    session.enlarge_batch(k, variant, SeamBias::protective(protective))?;
    let paths = session.inserted_paths()?;
    Ok((session.image, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::BitDepth;

    fn noisy(w: usize, h: usize, seed: u64) -> RasterImage {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        RasterImage::from_fn(w, h, 3, BitDepth::Eight, |_, _, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 256) as f64 / 255.0
        })
        .unwrap()
    }

    #[test]
    fn zero_removals_and_insertions_are_identity() {
        let img = noisy(9, 6, 1);
        let (out, seams, prov) = remove_k_seams(&img, 0, Variant::Backward, None, None).unwrap();
        assert_eq!(out, img);
        assert!(seams.is_empty());
        assert_eq!(prov, ProvenanceGrid::identity(9, 6));
        let (out, paths) = insert_k_seams(&img, 0, Variant::Forward, None).unwrap();
        assert_eq!(out, img);
        assert!(paths.is_empty());
    }

    #[test]
    fn k_must_be_below_width() {
        let img = noisy(5, 4, 2);
        assert!(matches!(
            remove_k_seams(&img, 5, Variant::Backward, None, None),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            insert_k_seams(&img, 5, Variant::Backward, None),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn ten_percent_of_512_leaves_461() {
        let img = noisy(512, 8, 3);
        let (out, seams, prov) = remove_k_seams(&img, 51, Variant::Forward, None, None).unwrap();
        assert_eq!(out.width(), 461);
        assert_eq!(seams.len(), 51);
        prov.validate().unwrap();
    }

    #[test]
    fn remove_then_insert_restores_width() {
        for variant in Variant::ALL {
            let img = noisy(40, 10, 4);
            let mut session = CarveSession::new(img);
            session.reduce(13, variant, SeamBias::none()).unwrap();
            assert_eq!(session.width(), 27);
            session.enlarge(13, variant, SeamBias::none()).unwrap();
            assert_eq!(session.width(), 40, "{variant:?}");
            assert_eq!(session.inserted_paths().unwrap().len(), 13);
        }
    }

    #[test]
    fn enlarging_past_width_splits_batches() {
        let mut session = CarveSession::new(noisy(6, 5, 5));
        session.enlarge(10, Variant::Backward, SeamBias::none()).unwrap();
        assert_eq!(session.width(), 16);
        session.provenance().validate().unwrap();
    }

    #[test]
    fn saliency_map_computed_once_and_contracted() {
        let mut session = CarveSession::new(noisy(30, 12, 6));
        session.reduce(10, Variant::Saliency, SeamBias::none()).unwrap();
        assert_eq!(session.energy_stats().saliency, 1);
        assert_eq!(session.energy_stats().backward, 0);

        let mut other = CarveSession::new(noisy(30, 12, 6));
        other.reduce(4, Variant::Backward, SeamBias::none()).unwrap();
        assert_eq!(other.energy_stats().backward, 4);
    }

    #[test]
    fn merge_variant_logs_merges() {
        let mut session = CarveSession::new(noisy(12, 7, 7));
        session.reduce(3, Variant::Merge, SeamBias::none()).unwrap();
        assert_eq!(session.width(), 9);
        assert_eq!(session.provenance().records().len(), 3 * 7);
        assert!(session.history().iter().all(|e| matches!(e, EditEvent::Merge { .. })));
    }

    #[test]
    fn protective_mask_is_avoided_during_selection() {
        let img = noisy(20, 10, 8);
        let protect = BitGrid::from_fn(20, 10, |_, c| (5..15).contains(&c));
        let mut session = CarveSession::new(img);
        session
            .enlarge_batch(4, Variant::Backward, SeamBias::protective(Some(&protect)))
            .unwrap();
        for event in session.history() {
            let EditEvent::Insertion { columns, .. } = event else {
                unreachable!()
            };
            // Inserted right of seam pixel c (or left at the border), never inside the band.
            assert!(columns.iter().all(|&c| !(6..=15).contains(&c)), "{columns:?}");
        }
    }

    #[test]
    fn merges_never_absorb_protected_pixels() {
        let img = noisy(16, 8, 11);
        let protect = BitGrid::from_fn(16, 8, |_, c| c == 6 || c == 15);
        let corridor = BitGrid::from_fn(16, 8, |_, c| c < 6);
        let mut session = CarveSession::new(img.clone());
        session
            .reduce(
                5,
                Variant::Merge,
                SeamBias {
                    removal: Some(&corridor),
                    protective: Some(&protect),
                },
            )
            .unwrap();
        let positions = session.provenance().positions().unwrap();
        for r in 0..8 {
            for c in [6, 15] {
                let (pr, pc) = positions[&Origin::Original { row: r, col: c }];
                assert_eq!(session.image().pixel(pr, pc), img.pixel(r, c));
            }
        }
    }

    #[test]
    fn mask_dimension_and_overlap_checked() {
        let mut session = CarveSession::new(noisy(6, 6, 9));
        let wrong = BitGrid::new(5, 6);
        assert!(session
            .find_seam(
                Variant::Backward,
                SeamBias {
                    removal: Some(&wrong),
                    protective: None
                }
            )
            .is_err());
        let a = BitGrid::from_fn(6, 6, |r, c| r == c);
        assert!(matches!(
            session.find_seam(
                Variant::Backward,
                SeamBias {
                    removal: Some(&a),
                    protective: Some(&a)
                }
            ),
            Err(Error::MaskOverlap { count: 6 })
        ));
    }

    #[test]
    fn parse_variant() {
        assert_eq!("merge".parse::<Variant>().unwrap(), Variant::Merge);
        assert!("sobel".parse::<Variant>().is_err());
    }
}
