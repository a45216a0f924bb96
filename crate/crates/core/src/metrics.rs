//! Pixel-level evaluation of predicted seam masks: plain and buffered
//! confusion counts, derived scores, and the seam localization score (SLS).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BitGrid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Swaps the roles of the positive and negative class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub buffered: bool,
    /// Buffer radius; 0 for plain counts.
    pub p: usize,
    pub sls: Option<f64>,
}

impl MetricReport {
    pub fn with_buffer(mut self, p: usize) -> Self {
        self.buffered = true;
        self.p = p;
        self
    }

    pub fn with_sls(mut self, sls: f64) -> Self {
        self.sls = Some(sls);
        self
    }

    /// One `key=value` line with a stable field order.
    pub fn to_record(&self) -> String {
        let mut line = format!(
            "buffered={} p={} accuracy={} precision={} recall={} f1={} mcc={}",
            self.buffered, self.p, self.accuracy, self.precision, self.recall, self.f1, self.mcc
        );
        if let Some(sls) = self.sls {
            line.push_str(&format!(" sls={sls}"));
        }
        line
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.buffered {
            writeln!(f, "buffered (p = {})", self.p)?;
        } else {
            writeln!(f, "plain")?;
        }
        writeln!(f, "  accuracy   {}", self.accuracy)?;
        writeln!(f, "  precision  {}", self.precision)?;
        writeln!(f, "  recall     {}", self.recall)?;
        writeln!(f, "  f1         {}", self.f1)?;
        write!(f, "  mcc        {}", self.mcc)?;
        if let Some(sls) = self.sls {
            write!(f, "\n  sls        {sls}")?;
        }
        Ok(())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Accuracy, precision, recall, F1 and MCC. Zero denominators yield 0, and
/// when the ground truth has no positives every score but accuracy is 0.
pub fn derive_metrics(c: ConfusionCounts) -> MetricReport {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let accuracy = ratio(tp + tn, tp + fp + fn_ + tn);
    let (precision, recall, f1, mcc) = if c.tp + c.fn_ == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        let mcc = ratio(tp * tn - fp * fn_, den);
        (precision, recall, f1, mcc)
    };
    MetricReport {
        accuracy,
        precision,
        recall,
        f1,
        mcc,
        buffered: false,
        p: 0,
        sls: None,
    }
}

pub fn confusion_plain(pred: &BitGrid, gt: &BitGrid) -> Result<ConfusionCounts> {
    pred.ensure_same_dims(gt)?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Confusion counts where a predicted positive within Chebyshev distance `p`
/// of an unconsumed ground-truth positive is a hit.
///
/// Predicted positives are visited in raster order and each consumes the
/// nearest unconsumed ground-truth positive (ties: smaller row, then smaller
/// column). A consumed ground-truth positive under a negative prediction
/// counts as a true negative.
pub fn confusion_buffered(pred: &BitGrid, gt: &BitGrid, p: usize) -> Result<ConfusionCounts> {
    pred.ensure_same_dims(gt)?;
    let (w, h) = pred.dims();
    let mut consumed = vec![false; w * h];
    let mut c = ConfusionCounts::default();
    for r in 0..h {
        for col in 0..w {
            if !pred.get(r, col) {
                continue;
            }
            let mut best: Option<(usize, usize, usize)> = None;
            for gr in r.saturating_sub(p)..=(r + p).min(h - 1) {
                for gc in col.saturating_sub(p)..=(col + p).min(w - 1) {
                    if !gt.get(gr, gc) || consumed[gr * w + gc] {
                        continue;
                    }
                    let d = gr.abs_diff(r).max(gc.abs_diff(col));
                    // Raster scan order already breaks ties by row, then column.
                    if best.map_or(true, |(bd, _, _)| d < bd) {
                        best = Some((d, gr, gc));
                    }
                }
            }
            match best {
                Some((_, gr, gc)) => {
                    consumed[gr * w + gc] = true;
                    c.tp += 1;
                }
                None => c.fp += 1,
            }
        }
    }
    for ((&p, &g), &used) in pred.bits().iter().zip(gt.bits()).zip(&consumed) {
        if !p {
            if g && !used {
                c.fn_ += 1;
            } else {
                c.tn += 1;
            }
        }
    }
    Ok(c)
}

/// Sums the counts, then derives metrics from the total.
pub fn dataset_aggregate(counts: &[ConfusionCounts]) -> Result<MetricReport> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("no confusion counts to aggregate"));
    }
    Ok(derive_metrics(counts.iter().copied().sum()))
}

/// Per-row column of one ground-truth seam in final-image coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeamTrajectory {
    columns: Vec<usize>,
    width: usize,
}

impl SeamTrajectory {
    pub fn new(columns: Vec<usize>, width: usize) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("seam trajectory has no rows"));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= width) {
            return Err(Error::OutOfBounds(format!("trajectory column {c} >= width {width}")));
        }
        Ok(Self { columns, width })
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.columns.len()
    }
}

/// Mean over rows of the distance from the trajectory to the nearest
/// predicted positive in that row, or `w` for a row with none.
pub fn sls_seam(traj: &SeamTrajectory, pred: &BitGrid) -> Result<f64> {
    let dims = (traj.width, traj.height());
    if pred.dims() != dims {
        return Err(Error::dims(dims, pred.dims()));
    }
    let w = traj.width;
    let total: f64 = traj
        .columns
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            (0..w)
                .filter(|&j| pred.get(r, j))
                .map(|j| c.abs_diff(j))
                .min()
                .unwrap_or(w) as f64
        })
        .sum();
    Ok(total / traj.height() as f64)
}

/// Mean [`sls_seam`] over all trajectories.
pub fn sls_image(trajs: &[SeamTrajectory], pred: &BitGrid) -> Result<f64> {
    if trajs.is_empty() {
        return Err(Error::EmptyInput("no seam trajectories"));
    }
    let mut sum = 0.0;
    for t in trajs {
        sum += sls_seam(t, pred)?;
    }
    Ok(sum / trajs.len() as f64)
}
