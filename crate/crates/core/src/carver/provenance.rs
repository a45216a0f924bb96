//! Where every pixel of the current image came from.

use crate::error::{Error, Result};
use crate::raster::BitGrid;

/// Identity of a pixel across edits: an original coordinate or a synthesized pixel id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Original { row: usize, col: usize },
    Synthesized(usize),
}

impl Origin {
    pub fn original(self) -> Option<(usize, usize)> {
        match self {
            Origin::Original { row, col } => Some((row, col)),
            Origin::Synthesized(_) => None,
        }
    }

    fn transposed(self) -> Origin {
        match self {
            Origin::Original { row, col } => Origin::Original { row: col, col: row },
            s => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SynthesisKind {
    /// Averaged duplicate added during enlargement.
    Inserted,
    /// Replacement for a merged pixel pair during reduction.
    Merged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SynthesisRecord {
    pub kind: SynthesisKind,
    pub parents: [Origin; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvenanceGrid {
    width: usize,
    height: usize,
    cells: Vec<Origin>,
    records: Vec<SynthesisRecord>,
}

impl ProvenanceGrid {
    /// Every pixel maps to itself.
    pub fn identity(width: usize, height: usize) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                cells.push(Origin::Original { row, col });
            }
        }
        Self {
            width,
            height,
            cells,
            records: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Origin {
        self.cells[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[Origin] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn record(&self, id: usize) -> Option<&SynthesisRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> &[SynthesisRecord] {
        &self.records
    }

    pub(crate) fn from_rows(width: usize, height: usize, cells: Vec<Origin>, records: Vec<SynthesisRecord>) -> Self {
        debug_assert_eq!(cells.len(), width * height);
        Self {
            width,
            height,
            cells,
            records,
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<Origin>, Vec<SynthesisRecord>) {
        (self.cells, self.records)
    }

    pub fn transposed(&self) -> ProvenanceGrid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.width {
            for r in 0..self.height {
                cells.push(self.get(r, c).transposed());
            }
        }
        let records = self
            .records
            .iter()
            .map(|rec| SynthesisRecord {
                kind: rec.kind,
                parents: rec.parents.map(Origin::transposed),
            })
            .collect();
        ProvenanceGrid {
            width: self.height,
            height: self.width,
            cells,
            records,
        }
    }

    /// Carries a mask over the original image into current coordinates. A
    /// synthesized pixel is set when either of its parents is.
    pub fn project_mask(&self, original: &BitGrid) -> BitGrid {
        let mut synth = Vec::with_capacity(self.records.len());
        for rec in &self.records {
            let bit = rec.parents.iter().any(|p| match *p {
                Origin::Original { row, col } => original.get(row, col),
                Origin::Synthesized(id) => synth[id],
            });
            synth.push(bit);
        }
        let bits = self
            .cells
            .iter()
            .map(|o| match *o {
                Origin::Original { row, col } => original.get(row, col),
                Origin::Synthesized(id) => synth[id],
            })
            .collect();
        BitGrid::from_bits(self.width, self.height, bits).expect("sized")
    }

    /// True if any current pixel still originates from a set mask pixel.
    pub fn contains_any(&self, original: &BitGrid) -> bool {
        self.cells.iter().any(|o| match *o {
            Origin::Original { row, col } => original.get(row, col),
            Origin::Synthesized(_) => false,
        })
    }

    /// Current `(row, col)` of every origin. Fails if an origin repeats.
    pub fn positions(&self) -> Result<std::collections::HashMap<Origin, (usize, usize)>> {
        let mut map = std::collections::HashMap::with_capacity(self.cells.len());
        for r in 0..self.height {
            for c in 0..self.width {
                if map.insert(self.get(r, c), (r, c)).is_some() {
                    return Err(Error::InconsistentProvenance(format!(
                        "origin {:?} appears twice",
                        self.get(r, c)
                    )));
                }
            }
        }
        Ok(map)
    }

    /// Checks the structural invariant: original columns strictly increase
    /// along each row and no origin repeats.
    pub fn validate(&self) -> Result<()> {
        self.positions()?;
        for r in 0..self.height {
            let mut last: Option<usize> = None;
            for o in self.row(r) {
                if let Origin::Original { col, .. } = *o {
                    if last.is_some_and(|l| col <= l) {
                        return Err(Error::InconsistentProvenance(format!(
                            "row {r}: original columns not increasing"
                        )));
                    }
                    last = Some(col);
                }
                if let Origin::Synthesized(id) = *o {
                    if id >= self.records.len() {
                        return Err(Error::InconsistentProvenance(format!("unknown synthesized id {id}")));
                    }
                }
            }
        }
        Ok(())
    }
}
