//! Pure single-seam edits. Each returns the new image and provenance; the
//! `*_columns` variants also report what they touched so a session can log it.

use crate::carver::dp::{Orientation, Seam};
use crate::carver::provenance::{Origin, ProvenanceGrid, SynthesisKind, SynthesisRecord};
use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// One row of a removal: the removed pixel and its horizontal neighbours at that moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemovedPixel {
    pub origin: Origin,
    pub left: Option<Origin>,
    pub right: Option<Origin>,
}

fn check_frame(img: &RasterImage, prov: &ProvenanceGrid, columns: &[usize]) -> Result<()> {
    if prov.dims() != img.dims() {
        return Err(Error::dims(img.dims(), prov.dims()));
    }
    if columns.len() != img.height() {
        return Err(Error::InvalidSeam(format!(
            "seam has {} rows, image has {}",
            columns.len(),
            img.height()
        )));
    }
    if let Some(&c) = columns.iter().find(|&&c| c >= img.width()) {
        return Err(Error::InvalidSeam(format!("column {c} >= width {}", img.width())));
    }
    Ok(())
}

fn mean_pixel<'a>(a: &'a [f64], b: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    a.iter().zip(b).map(|(x, y)| (x + y) / 2.0)
}

pub(crate) fn remove_columns(
    img: &RasterImage,
    prov: ProvenanceGrid,
    columns: &[usize],
) -> Result<(RasterImage, ProvenanceGrid, Vec<RemovedPixel>)> {
    check_frame(img, &prov, columns)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    if w < 2 {
        return Err(Error::Degenerate(
            "cannot remove a seam from a 1-pixel-wide image".into(),
        ));
    }
    let mut samples = Vec::with_capacity((w - 1) * h * ch);
    let mut cells = Vec::with_capacity((w - 1) * h);
    let mut removed = Vec::with_capacity(h);
    for (r, &skip) in columns.iter().enumerate() {
        let row = img.row(r);
        samples.extend_from_slice(&row[..skip * ch]);
        samples.extend_from_slice(&row[(skip + 1) * ch..]);
        let origins = prov.row(r);
        cells.extend_from_slice(&origins[..skip]);
        cells.extend_from_slice(&origins[skip + 1..]);
        removed.push(RemovedPixel {
            origin: origins[skip],
            left: skip.checked_sub(1).map(|c| origins[c]),
            right: origins.get(skip + 1).copied(),
        });
    }
    let (_, records) = prov.into_parts();
    Ok((
        RasterImage::from_parts(w - 1, h, ch, img.bit_depth(), samples),
        ProvenanceGrid::from_rows(w - 1, h, cells, records),
        removed,
    ))
}

/// Where the averaged pixel goes and which pair it averages.
/// Normally the pair is `(c, c+1)` and the new pixel lands between them at
/// `c+1`; at the last column the left neighbour is used instead.
fn insertion_pair(c: usize, w: usize) -> (usize, usize, usize) {
    if w == 1 {
        (0, 0, 1)
    } else if c + 1 < w {
        (c, c + 1, c + 1)
    } else {
        (c - 1, c, c)
    }
}

/// Inserts one averaged pixel per row. Returns per-row positions and origins
/// of the new pixels in the enlarged image. Connectivity is not required.
pub(crate) fn insert_columns(
    img: &RasterImage,
    prov: ProvenanceGrid,
    columns: &[usize],
) -> Result<(RasterImage, ProvenanceGrid, Vec<usize>, Vec<Origin>)> {
    check_frame(img, &prov, columns)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (old_cells, mut records) = prov.into_parts();
    let mut samples = Vec::with_capacity((w + 1) * h * ch);
    let mut cells = Vec::with_capacity((w + 1) * h);
    let mut positions = Vec::with_capacity(h);
    let mut new_origins = Vec::with_capacity(h);
    for (r, &c) in columns.iter().enumerate() {
        let (a, b, at) = insertion_pair(c, w);
        let row = img.row(r);
        samples.extend_from_slice(&row[..at * ch]);
        samples.extend(mean_pixel(img.pixel(r, a), img.pixel(r, b)));
        samples.extend_from_slice(&row[at * ch..]);

        let origins = &old_cells[r * w..(r + 1) * w];
        records.push(SynthesisRecord {
            kind: SynthesisKind::Inserted,
            parents: [origins[a], origins[b]],
        });
        let id = Origin::Synthesized(records.len() - 1);
        cells.extend_from_slice(&origins[..at]);
        cells.push(id);
        cells.extend_from_slice(&origins[at..]);
        positions.push(at);
        new_origins.push(id);
    }
    Ok((
        RasterImage::from_parts(w + 1, h, ch, img.bit_depth(), samples),
        ProvenanceGrid::from_rows(w + 1, h, cells, records),
        positions,
        new_origins,
    ))
}

/// Replaces each row's seam pixel and its right neighbour (left at the last
/// column) by their mean. Returns merged positions and origins.
pub(crate) fn merge_columns(
    img: &RasterImage,
    prov: ProvenanceGrid,
    columns: &[usize],
) -> Result<(RasterImage, ProvenanceGrid, Vec<usize>, Vec<Origin>)> {
    check_frame(img, &prov, columns)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    if w < 2 {
        return Err(Error::Degenerate("merging needs width >= 2".into()));
    }
    let (old_cells, mut records) = prov.into_parts();
    let mut samples = Vec::with_capacity((w - 1) * h * ch);
    let mut cells = Vec::with_capacity((w - 1) * h);
    let mut positions = Vec::with_capacity(h);
    let mut merged = Vec::with_capacity(h);
    for (r, &c) in columns.iter().enumerate() {
        let a = if c + 1 < w { c } else { c - 1 };
        let row = img.row(r);
        samples.extend_from_slice(&row[..a * ch]);
        samples.extend(mean_pixel(img.pixel(r, a), img.pixel(r, a + 1)));
        samples.extend_from_slice(&row[(a + 2) * ch..]);

        let origins = &old_cells[r * w..(r + 1) * w];
        records.push(SynthesisRecord {
            kind: SynthesisKind::Merged,
            parents: [origins[a], origins[a + 1]],
        });
        let id = Origin::Synthesized(records.len() - 1);
        cells.extend_from_slice(&origins[..a]);
        cells.push(id);
        cells.extend_from_slice(&origins[a + 2..]);
        positions.push(a);
        merged.push(id);
    }
    Ok((
        RasterImage::from_parts(w - 1, h, ch, img.bit_depth(), samples),
        ProvenanceGrid::from_rows(w - 1, h, cells, records),
        positions,
        merged,
    ))
}

pub fn transpose_for_horizontal(img: &RasterImage) -> RasterImage {
    img.transposed()
}

/// Runs a vertical edit, transposing around it for horizontal seams.
fn oriented<T>(
    img: &RasterImage,
    seam: &Seam,
    prov: ProvenanceGrid,
    edit: impl FnOnce(&RasterImage, ProvenanceGrid) -> Result<(RasterImage, ProvenanceGrid, T)>,
) -> Result<(RasterImage, ProvenanceGrid, T)> {
    match seam.orientation() {
        Orientation::Vertical => edit(img, prov),
        Orientation::Horizontal => {
            let (out, p, extra) = edit(&img.transposed(), prov.transposed())?;
            Ok((out.transposed(), p.transposed(), extra))
        }
    }
}

/// Drops the seam pixel from every row.
pub fn remove_seam(img: &RasterImage, seam: &Seam, prov: ProvenanceGrid) -> Result<(RasterImage, ProvenanceGrid)> {
    let (out, p, _) = oriented(img, seam, prov, |img, prov| remove_columns(img, prov, seam.columns()))?;
    Ok((out, p))
}

/// Inserts the mean of each seam pixel and its right neighbour next to it.
/// Returns the seam traced by the inserted pixels in the enlarged image.
pub fn insert_seam(
    img: &RasterImage,
    seam: &Seam,
    prov: ProvenanceGrid,
) -> Result<(RasterImage, ProvenanceGrid, Seam)> {
    let (out, p, positions) = oriented(img, seam, prov, |img, prov| {
        let (o, p, pos, _) = insert_columns(img, prov, seam.columns())?;
        Ok((o, p, pos))
    })?;
    let width = match seam.orientation() {
        Orientation::Vertical => out.width(),
        Orientation::Horizontal => out.height(),
    };
    let inserted = Seam::new(positions, width, seam.orientation())?;
    Ok((out, p, inserted))
}

pub fn merge_seam(img: &RasterImage, seam: &Seam, prov: ProvenanceGrid) -> Result<(RasterImage, ProvenanceGrid)> {
    let (out, p, _) = oriented(img, seam, prov, |img, prov| {
        let (o, p, _, _) = merge_columns(img, prov, seam.columns())?;
        Ok((o, p, ()))
    })?;
    Ok((out, p))
}
