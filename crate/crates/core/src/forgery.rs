//! Forgery recipes (retargeting, object removal, object displacement) and
//! ground-truth seam masks built from provenance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::carver::{CarveSession, EditEvent, Orientation, Origin, ProvenanceGrid, SeamBias, SynthesisKind, Variant};
use crate::error::{Error, Result};
use crate::raster::{BitGrid, RasterImage, SeamMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecipeKind {
    Retarget { ratio: f64 },
    ObjectRemoval,
    ObjectDisplacement { direction: Direction, shift: usize },
}

/// Everything needed to replay a forgery, minus the masks themselves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgeryRecipe {
    #[serde(flatten)]
    pub kind: RecipeKind,
    pub variant: Variant,
    pub seed: u64,
}

impl ForgeryRecipe {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            RecipeKind::Retarget { ratio } if !(ratio > 0.0 && ratio <= 0.5) => {
                Err(Error::InvalidArgument(format!("ratio {ratio} outside (0, 0.5]")))
            }
            RecipeKind::ObjectDisplacement { shift: 0, .. } => {
                Err(Error::InvalidArgument("shift must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForgeryResult {
    pub forged: RasterImage,
    pub gt: SeamMask,
    /// Provenance of `forged` relative to the input image.
    pub provenance: ProvenanceGrid,
    /// `Vertical`: one column per row. `Horizontal`: one row per column.
    pub orientation: Orientation,
    /// Final-image trajectory of every removed (or merged) seam, in edit order.
    pub removed_seams: Vec<Vec<usize>>,
    /// Final-image trajectory of every inserted seam, in edit order.
    pub inserted_seams: Vec<Vec<usize>>,
    pub recipe: ForgeryRecipe,
}

impl ForgeryResult {
    pub fn removals(&self) -> usize {
        self.removed_seams.len()
    }

    pub fn insertions(&self) -> usize {
        self.inserted_seams.len()
    }
}

/// Ground truth over the final image: survivors that were left/right
/// neighbours of a removed pixel (and surviving merge products) in the
/// removed layer, every inserted pixel in the inserted layer.
pub fn build_gt_masks(prov: &ProvenanceGrid, history: &[EditEvent]) -> Result<SeamMask> {
    prov.validate()?;
    let positions = prov.positions()?;
    let (w, h) = prov.dims();
    let mut removed = BitGrid::new(w, h);
    let mut inserted = BitGrid::new(w, h);
    let mark = |grid: &mut BitGrid, origin: Origin| {
        if let Some(&(r, c)) = positions.get(&origin) {
            grid.set(r, c, true);
        }
    };
    for event in history {
        match event {
            EditEvent::Removal { pixels, .. } => {
                for p in pixels {
                    for n in [p.left, p.right].into_iter().flatten() {
                        mark(&mut removed, n);
                    }
                }
            }
            EditEvent::Merge { merged, .. } => merged.iter().for_each(|&o| mark(&mut removed, o)),
            EditEvent::Insertion { .. } => {}
        }
    }
    for r in 0..h {
        for c in 0..w {
            if let Origin::Synthesized(id) = prov.get(r, c) {
                let kind = prov
                    .record(id)
                    .ok_or_else(|| Error::InconsistentProvenance(format!("unknown synthesized id {id}")))?
                    .kind;
                if kind == SynthesisKind::Inserted {
                    inserted.set(r, c, true);
                }
            }
        }
    }
    SeamMask::new(removed, inserted)
}

/// Per-row column of one seam.
pub type Columns = Vec<usize>;

/// Final-image columns of every removed and inserted seam.
///
/// A removed pixel is located by its right survivor at removal time (its
/// left one at the border); a merged parent by the pixel it merged into.
/// Chains are followed through later edits until a surviving pixel is found.
pub fn seam_trajectories(prov: &ProvenanceGrid, history: &[EditEvent]) -> Result<(Vec<Columns>, Vec<Columns>)> {
    let positions = prov.positions()?;
    let mut successor: HashMap<Origin, Origin> = HashMap::new();
    for event in history {
        match event {
            EditEvent::Removal { pixels, .. } => {
                for p in pixels {
                    if let Some(next) = p.right.or(p.left) {
                        successor.insert(p.origin, next);
                    }
                }
            }
            EditEvent::Merge { merged, .. } => {
                for &m in merged {
                    let Origin::Synthesized(id) = m else { continue };
                    let record = prov
                        .record(id)
                        .ok_or_else(|| Error::InconsistentProvenance(format!("unknown synthesized id {id}")))?;
                    for parent in record.parents {
                        successor.insert(parent, m);
                    }
                }
            }
            EditEvent::Insertion { .. } => {}
        }
    }
    let resolve = |mut origin: Origin| -> Result<usize> {
        loop {
            if let Some(&(_, c)) = positions.get(&origin) {
                return Ok(c);
            }
            origin = *successor
                .get(&origin)
                .ok_or_else(|| Error::InconsistentProvenance(format!("{origin:?} cannot be located")))?;
        }
    };
    let mut removed = Vec::new();
    let mut inserted = Vec::new();
    for event in history {
        match event {
            EditEvent::Removal { pixels, .. } => {
                removed.push(pixels.iter().map(|p| resolve(p.origin)).collect::<Result<_>>()?)
            }
            EditEvent::Merge { merged, .. } => removed.push(merged.iter().map(|&o| resolve(o)).collect::<Result<_>>()?),
            EditEvent::Insertion { inserted: origins, .. } => {
                inserted.push(origins.iter().map(|&o| resolve(o)).collect::<Result<_>>()?)
            }
        }
    }
    Ok((removed, inserted))
}

/// Which layer of the ground truth a trajectory belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeamKind {
    Removed,
    Inserted,
}

/// One line of a `.seams.jsonl` sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub kind: SeamKind,
    pub orientation: Orientation,
    pub columns: Vec<usize>,
}

impl ForgeryResult {
    pub fn trajectory_records(&self) -> Vec<TrajectoryRecord> {
        let tagged = |kind, seams: &[Vec<usize>]| {
            seams
                .iter()
                .map(move |columns| TrajectoryRecord {
                    kind,
                    orientation: self.orientation,
                    columns: columns.clone(),
                })
                .collect::<Vec<_>>()
        };
        let mut out = tagged(SeamKind::Removed, &self.removed_seams);
        out.extend(tagged(SeamKind::Inserted, &self.inserted_seams));
        out
    }
}

/// One JSON object per line.
pub fn write_trajectories(records: &[TrajectoryRecord]) -> Result<String> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_trajectories(text: &str) -> Result<Vec<TrajectoryRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

fn finish(session: CarveSession, orientation: Orientation, recipe: ForgeryRecipe) -> Result<ForgeryResult> {
    let (forged, provenance, history) = session.into_parts();
    let gt = build_gt_masks(&provenance, &history)?;
    let (removed_seams, inserted_seams) = seam_trajectories(&provenance, &history)?;
    let (forged, gt, provenance) = match orientation {
        Orientation::Vertical => (forged, gt, provenance),
        Orientation::Horizontal => (forged.transposed(), gt.transposed(), provenance.transposed()),
    };
    Ok(ForgeryResult {
        forged,
        gt,
        provenance,
        orientation,
        removed_seams,
        inserted_seams,
        recipe,
    })
}

fn check_mask(img: &RasterImage, mask: &BitGrid) -> Result<()> {
    if mask.dims() != img.dims() {
        return Err(Error::dims(img.dims(), mask.dims()));
    }
    Ok(())
}

/// Removes `k = round(ratio * width)` seams, then inserts `k` to restore the width.
pub fn retarget_forgery(img: &RasterImage, ratio: f64, variant: Variant, seed: u64) -> Result<ForgeryResult> {
    let recipe = ForgeryRecipe {
        kind: RecipeKind::Retarget { ratio },
        variant,
        seed,
    };
    recipe.validate()?;
    let k = (ratio * img.width() as f64).round() as usize;
    if k == 0 {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} removes no seams from width {}",
            img.width()
        )));
    }
    let mut session = CarveSession::new(img.clone());
    session.reduce(k, variant, SeamBias::none())?;
    session.enlarge(k, variant, SeamBias::none())?;
    finish(session, Orientation::Vertical, recipe)
}

fn widest_row_span(mask: &BitGrid) -> usize {
    (0..mask.height())
        .filter_map(|r| {
            let first = (0..mask.width()).find(|&c| mask.get(r, c))?;
            let last = (0..mask.width()).rev().find(|&c| mask.get(r, c))?;
            Some(last - first + 1)
        })
        .max()
        .unwrap_or(0)
}

/// Removes seams through `removal` until none of its pixels survive, then
/// reinserts as many seams while avoiding `protective`.
pub fn object_removal_forgery(
    img: &RasterImage,
    removal: &BitGrid,
    protective: Option<&BitGrid>,
    variant: Variant,
) -> Result<ForgeryResult> {
    check_mask(img, removal)?;
    if let Some(p) = protective {
        check_mask(img, p)?;
        let count = removal.overlap_count(p)?;
        if count > 0 {
            return Err(Error::MaskOverlap { count });
        }
    }
    let span = widest_row_span(removal);
    let guarded = protective.map_or(0, widest_row_span);
    if span > 0 && span + guarded >= img.width() {
        return Err(Error::Infeasible(format!(
            "removal span {span} plus protective span {guarded} leaves no room in width {}",
            img.width()
        )));
    }
    let recipe = ForgeryRecipe {
        kind: RecipeKind::ObjectRemoval,
        variant,
        seed: 0,
    };
    let mut session = CarveSession::new(img.clone());
    let k = session.reduce_until_cleared(variant, removal, protective)?;
    log::debug!("object removal took {k} seams");
    session.enlarge(k, variant, SeamBias::protective(protective))?;
    finish(session, Orientation::Vertical, recipe)
}

/// Shifts the object in `object` by `shift` pixels: seams are removed from the
/// full-height band between the object and the border on the side it moves
/// towards, and the same number inserted in the band on the other side.
pub fn object_displacement_forgery(
    img: &RasterImage,
    object: &BitGrid,
    direction: Direction,
    shift: usize,
    variant: Variant,
) -> Result<ForgeryResult> {
    check_mask(img, object)?;
    let recipe = ForgeryRecipe {
        kind: RecipeKind::ObjectDisplacement { direction, shift },
        variant,
        seed: 0,
    };
    recipe.validate()?;
    let (work, mask, orientation) = match direction {
        Direction::Left | Direction::Right => (img.clone(), object.clone(), Orientation::Vertical),
        Direction::Up | Direction::Down => (img.transposed(), object.transposed(), Orientation::Horizontal),
    };
    let towards_start = matches!(direction, Direction::Left | Direction::Up);
    let (_, min_col, _, max_col) = mask
        .bounding_box()
        .ok_or_else(|| Error::InvalidArgument("displacement needs a non-empty object mask".into()))?;
    let w = work.width();
    let before = 0..min_col;
    let after = max_col + 1..w;
    let (remove_band, insert_band) = if towards_start {
        (before, after)
    } else {
        (after, before)
    };
    if remove_band.is_empty() {
        return Err(Error::Infeasible(
            "object touches the border on the removal side".into(),
        ));
    }
    // A merge also consumes the pixel next to the seam, so it needs one spare column.
    let merging = variant == Variant::Merge;
    let needed = [
        (shift + merging as usize, &remove_band, "removal"),
        (shift, &insert_band, "insertion"),
    ];
    for (cols, band, side) in needed {
        if cols > band.len() {
            return Err(Error::Infeasible(format!(
                "shift {shift} needs {cols} free columns on the {side} side, found {}",
                band.len()
            )));
        }
    }
    let band_mask = |band: &std::ops::Range<usize>| BitGrid::from_fn(w, work.height(), |_, c| band.contains(&c));
    let remove_corridor = band_mask(&remove_band);
    let insert_corridor = band_mask(&insert_band);

    let mut session = CarveSession::new(work);
    session.reduce(
        shift,
        variant,
        SeamBias {
            removal: Some(&remove_corridor),
            protective: Some(&mask),
        },
    )?;
    session.enlarge(
        shift,
        variant,
        SeamBias {
            removal: Some(&insert_corridor),
            protective: Some(&mask),
        },
    )?;

    let positions = session.provenance().positions()?;
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if !mask.get(r, c) {
                continue;
            }
            let expected = if towards_start {
                c.checked_sub(shift)
            } else {
                Some(c + shift)
            };
            if positions.get(&Origin::Original { row: r, col: c }) != expected.map(|e| (r, e)).as_ref() {
                return Err(Error::Infeasible(format!(
                    "object pixel ({r}, {c}) did not move by exactly {shift}"
                )));
            }
        }
    }
    finish(session, orientation, recipe)
}
