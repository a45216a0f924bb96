//! Minimum cumulative energy table and optimal-seam backtracking.

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyMap, ForwardCosts};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// An 8-connected path with one column index per row.
///
/// Horizontal seams are stored in the transposed frame: one row index per column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seam {
    columns: Vec<usize>,
    orientation: Orientation,
}

impl Seam {
    /// Validates connectivity and that every index is below `width`.
    pub fn new(columns: Vec<usize>, width: usize, orientation: Orientation) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSeam("empty seam".into()));
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, &c)| c >= width) {
            return Err(Error::InvalidSeam(format!("row {i}: column {c} >= width {width}")));
        }
        if let Some(i) = (1..columns.len()).find(|&i| columns[i].abs_diff(columns[i - 1]) > 1) {
            return Err(Error::InvalidSeam(format!(
                "rows {} and {i} jump from {} to {}",
                i - 1,
                columns[i - 1],
                columns[i]
            )));
        }
        Ok(Self { columns, orientation })
    }

    pub fn vertical(columns: Vec<usize>, width: usize) -> Result<Self> {
        Self::new(columns, width, Orientation::Vertical)
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Which recurrence fills the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyMode {
    Backward,
    Saliency,
    Forward,
}

/// DP table `M` plus the predecessor offset (-1, 0, +1) that attained each minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeMatrix {
    width: usize,
    height: usize,
    values: Vec<f64>,
    parents: Vec<i8>,
}

impl CumulativeMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn parent(&self, row: usize, col: usize) -> i8 {
        self.parents[row * self.width + col]
    }

    /// Smallest last-row value; ties go to the smallest column.
    pub fn last_row_min(&self) -> (usize, f64) {
        let last = &self.values[(self.height - 1) * self.width..];
        let mut best = (0, last[0]);
        for (c, &v) in last.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (c, v);
            }
        }
        best
    }
}

/// Predecessor visit order; the first strict minimum wins, so ties prefer
/// straight up, then up-left, then up-right.
const PARENT_ORDER: [i8; 3] = [0, -1, 1];

/// Fills `M(r,c) = e(r,c) + min_k(M(r-1,c+k) [+ C_k(r,c)])`.
///
/// In forward mode row 0 carries the up cost: `M(0,c) = e(0,c) + C_U(0,c)`.
/// Sums are accumulated in `f64`, row by row, left to right.
pub fn cumulative_matrix(
    energy: &EnergyMap,
    mode: EnergyMode,
    costs: Option<&ForwardCosts>,
) -> Result<CumulativeMatrix> {
    let (w, h) = energy.dims();
    if w == 0 || h == 0 {
        return Err(Error::Degenerate("empty energy map".into()));
    }
    let costs = match (mode, costs) {
        (EnergyMode::Forward, Some(fc)) => {
            if fc.dims() != energy.dims() {
                return Err(Error::dims(energy.dims(), fc.dims()));
            }
            Some(fc)
        }
        (EnergyMode::Forward, None) | (_, Some(_)) => return Err(Error::ForwardCostsMismatch),
        (_, None) => None,
    };

    let mut values = vec![0.0; w * h];
    let mut parents = vec![0i8; w * h];
    for (c, v) in values[..w].iter_mut().enumerate() {
        *v = match costs {
            Some(fc) => energy.get(0, c) + fc.up.get(0, c),
            None => energy.get(0, c),
        };
    }
    for r in 1..h {
        let (prev, cur) = values.split_at_mut(r * w);
        let prev = &prev[(r - 1) * w..];
        for c in 0..w {
            let mut best: Option<(f64, i8)> = None;
            for &k in &PARENT_ORDER {
                let pc = c as isize + k as isize;
                if pc < 0 || pc >= w as isize {
                    continue;
                }
                let step = match (costs, k) {
                    (None, _) => prev[pc as usize],
                    (Some(fc), -1) => prev[pc as usize] + fc.left.get(r, c),
                    (Some(fc), 0) => prev[pc as usize] + fc.up.get(r, c),
                    (Some(fc), _) => prev[pc as usize] + fc.right.get(r, c),
                };
                if best.map_or(true, |(v, _)| step < v) {
                    best = Some((step, k));
                }
            }
            let (v, k) = best.expect("column 0 always has a straight-up parent");
            cur[c] = energy.get(r, c) + v;
            parents[r * w + c] = k;
        }
    }
    Ok(CumulativeMatrix {
        width: w,
        height: h,
        values,
        parents,
    })
}

/// Backtracks from the last-row minimum.
pub fn optimal_seam(matrix: &CumulativeMatrix) -> Seam {
    let h = matrix.height;
    let mut columns = vec![0usize; h];
    let (mut c, _) = matrix.last_row_min();
    for r in (0..h).rev() {
        columns[r] = c;
        if r > 0 {
            c = (c as isize + matrix.parent(r, c) as isize) as usize;
        }
    }
    Seam {
        columns,
        orientation: Orientation::Vertical,
    }
}
