//! Per-pixel cost fields for the seam search.
//!
//! Backward energy is the first-order gradient magnitude of the channel-summed
//! intensity. Forward costs measure the intensity jump that would be created
//! by joining the neighbours of a removed pixel. Saliency energy is the Lab
//! distance between the image mean and a binomially blurred copy; it does not
//! need recomputing after each seam. All borders replicate the nearest pixel.

use crate::error::{Error, Result};
use crate::raster::{BitGrid, RasterImage};

/// Energy assigned to removal-mask pixels.
pub const LOW_BIAS: f64 = -1000.0;
/// Energy assigned to protective-mask pixels.
pub const HIGH_BIAS: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl EnergyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} energy values, got {}",
                width * height,
                values.len()
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self { width, height, values }
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Drops one column per row, as a vertical seam removal does to the image.
    pub fn remove_columns(&self, columns: &[usize]) -> Result<EnergyMap> {
        if columns.len() != self.height || self.width < 2 {
            return Err(Error::InvalidSeam(format!(
                "cannot remove {} columns from {}x{} map",
                columns.len(),
                self.width,
                self.height
            )));
        }
        let mut values = Vec::with_capacity((self.width - 1) * self.height);
        for (r, &skip) in columns.iter().enumerate() {
            if skip >= self.width {
                return Err(Error::InvalidSeam(format!("column {skip} out of range")));
            }
            let row = &self.values[r * self.width..(r + 1) * self.width];
            values.extend_from_slice(&row[..skip]);
            values.extend_from_slice(&row[skip + 1..]);
        }
        Ok(EnergyMap {
            width: self.width - 1,
            height: self.height,
            values,
        })
    }
}

/// Left, up and right transition costs for the forward-energy recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCosts {
    pub left: EnergyMap,
    pub up: EnergyMap,
    pub right: EnergyMap,
}

impl ForwardCosts {
    pub fn dims(&self) -> (usize, usize) {
        self.up.dims()
    }
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Sum over channels of each pixel; gradients are linear so this equals the
/// per-channel derivative sum.
fn channel_sum(img: &RasterImage) -> Vec<f64> {
    img.samples()
        .chunks_exact(img.channels())
        .map(|px| px.iter().sum())
        .collect()
}

pub fn backward_energy(img: &RasterImage) -> EnergyMap {
    let (w, h) = img.dims();
    let plane = channel_sum(img);
    let at = |r: isize, c: isize| plane[clamp_index(r, h) * w + clamp_index(c, w)];
    EnergyMap::from_fn(w, h, |r, c| {
        let (r, c) = (r as isize, c as isize);
        let dx = (at(r, c + 1) - at(r, c - 1)) / 2.0;
        let dy = (at(r + 1, c) - at(r - 1, c)) / 2.0;
        (dx * dx + dy * dy).sqrt()
    })
}

pub fn forward_costs(img: &RasterImage) -> ForwardCosts {
    let (w, h) = img.dims();
    let ch = img.channels();
    let px = |r: isize, c: isize| img.pixel(clamp_index(r, h), clamp_index(c, w));
    let l1 = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum() };

    let mut left = Vec::with_capacity(w * h);
    let mut up = Vec::with_capacity(w * h);
    let mut right = Vec::with_capacity(w * h);
    debug_assert!(ch == 1 || ch == 3);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let west = px(r, c - 1);
            let east = px(r, c + 1);
            let north = px(r - 1, c);
            let cu = l1(east, west);
            up.push(cu);
            left.push(cu + l1(north, west));
            right.push(cu + l1(north, east));
        }
    }
    ForwardCosts {
        left: EnergyMap::new(w, h, left).expect("sized"),
        up: EnergyMap::new(w, h, up).expect("sized"),
        right: EnergyMap::new(w, h, right).expect("sized"),
    }
}

fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// sRGB (D65) to CIE Lab.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(srgb_to_linear);
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let (fx, fy, fz) = (lab_f(x / 0.95047), lab_f(y), lab_f(z / 1.08883));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Lab planes; grayscale maps linearly to L in [0, 100] with a = b = 0.
fn to_lab(img: &RasterImage) -> [Vec<f64>; 3] {
    let n = img.width() * img.height();
    let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, px) in img.samples().chunks_exact(img.channels()).enumerate() {
        let lab = if px.len() == 1 {
            [100.0 * px[0], 0.0, 0.0]
        } else {
            srgb_to_lab([px[0], px[1], px[2]])
        };
        for k in 0..3 {
            planes[k][i] = lab[k];
        }
    }
    planes
}

const BINOMIAL5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Separable 5x5 binomial blur with replicated borders.
fn binomial_blur(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut horiz = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            horiz[r * w + c] = BINOMIAL5
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * plane[r * w + clamp_index(c as isize + k as isize - 2, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = BINOMIAL5
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * horiz[clamp_index(r as isize + k as isize - 2, h) * w + c])
                .sum();
        }
    }
    out
}

/// Euclidean Lab distance between the image-mean color and the blurred image.
pub fn saliency_energy(img: &RasterImage) -> EnergyMap {
    let (w, h) = img.dims();
    let lab = to_lab(img);
    let n = (w * h) as f64;
    let mean: Vec<f64> = lab.iter().map(|p| p.iter().sum::<f64>() / n).collect();
    let blurred: Vec<Vec<f64>> = lab.iter().map(|p| binomial_blur(p, w, h)).collect();
    EnergyMap::from_fn(w, h, |r, c| {
        let i = r * w + c;
        (0..3).map(|k| (mean[k] - blurred[k][i]).powi(2)).sum::<f64>().sqrt()
    })
}

/// Overwrites removal pixels with [`LOW_BIAS`] and protective pixels with [`HIGH_BIAS`].
pub fn apply_mask_bias(
    energy: &EnergyMap,
    removal: Option<&BitGrid>,
    protective: Option<&BitGrid>,
) -> Result<EnergyMap> {
    for mask in [removal, protective].into_iter().flatten() {
        if mask.dims() != energy.dims() {
            return Err(Error::dims(energy.dims(), mask.dims()));
        }
    }
    if let (Some(rm), Some(pm)) = (removal, protective) {
        let count = rm.overlap_count(pm)?;
        if count > 0 {
            return Err(Error::MaskOverlap { count });
        }
    }
    let mut out = energy.clone();
    for (mask, value) in [(removal, LOW_BIAS), (protective, HIGH_BIAS)] {
        if let Some(mask) = mask {
            for (v, &set) in out.values.iter_mut().zip(mask.bits()) {
                if set {
                    *v = value;
                }
            }
        }
    }
    Ok(out)
}
