//! Image, mask and tile types shared by every other module.
//!
//! Samples are stored as unit-normalized `f64` regardless of the declared bit
//! depth, so 8-bit RGB and 16-bit grayscale inputs produce commensurate
//! energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared bit depth of a raster's source container.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    /// Largest code value, `2^bits - 1`.
    pub fn max_code(self) -> u32 {
        match self {
            BitDepth::Eight => u8::MAX as u32,
            BitDepth::Sixteen => u16::MAX as u32,
        }
    }
}

/// A row-major multi-channel raster with unit-normalized samples.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    bit_depth: BitDepth,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, bit_depth: BitDepth, samples: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        if width == 0 || height == 0 {
            return Err(Error::Degenerate(format!("{width}x{height} raster")));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidArgument(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            bit_depth,
            samples,
        })
    }

    /// Builds a raster by evaluating `f(row, col, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        bit_depth: BitDepth,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    samples.push(f(r, c, ch));
                }
            }
        }
        Self::new(width, height, channels, bit_depth, samples)
    }

    /// Internal constructor for callers that already uphold the invariants.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        channels: usize,
        bit_depth: BitDepth,
        samples: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            bit_depth,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.bit_depth
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.samples[start..start + self.channels]
    }

    #[inline]
    pub fn sample(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.samples[(row * self.width + col) * self.channels + channel]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let stride = self.width * self.channels;
        &self.samples[row * stride..(row + 1) * stride]
    }

    /// Swaps rows and columns. Horizontal-seam work is done on the transpose.
    pub fn transposed(&self) -> RasterImage {
        let (w, h, ch) = (self.width, self.height, self.channels);
        let mut samples = Vec::with_capacity(self.samples.len());
        for c in 0..w {
            for r in 0..h {
                samples.extend_from_slice(self.pixel(r, c));
            }
        }
        RasterImage::from_parts(h, w, ch, self.bit_depth, samples)
    }
}

/// Strictly binary row-major grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitGrid {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} bits for {width}x{height}, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self { width, height, bits }
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn union(&self, other: &BitGrid) -> Result<BitGrid> {
        self.ensure_same_dims(other)?;
        Ok(BitGrid {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        })
    }

    pub fn complement(&self) -> BitGrid {
        BitGrid {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn overlap_count(&self, other: &BitGrid) -> Result<usize> {
        self.ensure_same_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count())
    }

    pub fn transposed(&self) -> BitGrid {
        BitGrid::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }

    pub(crate) fn ensure_same_dims(&self, other: &BitGrid) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// Inclusive bounding box `(min_row, min_col, max_row, max_col)` of set bits.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) {
                    bbox = Some(match bbox {
                        None => (r, c, r, c),
                        Some((r0, c0, r1, c1)) => (r0.min(r), c0.min(c), r1.max(r), c1.max(c)),
                    });
                }
            }
        }
        bbox
    }
}

/// What a user-provided mask asks the carver to do.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Removal,
    Protective,
    Object,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelMask {
    pub kind: MaskKind,
    pub grid: BitGrid,
}

impl PixelMask {
    pub fn new(kind: MaskKind, grid: BitGrid) -> Self {
        Self { kind, grid }
    }

    pub fn ensure_matches(&self, img: &RasterImage) -> Result<()> {
        if self.grid.dims() != img.dims() {
            return Err(Error::dims(img.dims(), self.grid.dims()));
        }
        Ok(())
    }
}

/// Ground-truth seam mask in final-image coordinates: survivors adjacent to
/// removed seams, and inserted pixels. The two layers may overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeamMask {
    pub removed: BitGrid,
    pub inserted: BitGrid,
}

impl SeamMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            removed: BitGrid::new(width, height),
            inserted: BitGrid::new(width, height),
        }
    }

    pub fn new(removed: BitGrid, inserted: BitGrid) -> Result<Self> {
        removed.ensure_same_dims(&inserted)?;
        Ok(Self { removed, inserted })
    }

    pub fn width(&self) -> usize {
        self.removed.width()
    }

    pub fn height(&self) -> usize {
        self.removed.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.removed.dims()
    }

    /// Either layer set.
    pub fn union(&self) -> BitGrid {
        self.removed.union(&self.inserted).expect("layers share dimensions")
    }

    pub fn transposed(&self) -> SeamMask {
        SeamMask {
            removed: self.removed.transposed(),
            inserted: self.inserted.transposed(),
        }
    }
}

/// Square tile anchored at its top-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileRegion {
    pub origin_row: usize,
    pub origin_col: usize,
    pub size: usize,
}

impl TileRegion {
    pub fn new(origin_row: usize, origin_col: usize, size: usize) -> Self {
        Self {
            origin_row,
            origin_col,
            size,
        }
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.size > 0 && self.origin_row + self.size <= height && self.origin_col + self.size <= width
    }
}

/// Exact sub-grid copy; no resampling.
pub fn crop(img: &RasterImage, region: TileRegion) -> Result<RasterImage> {
    if !region.fits(img.width(), img.height()) {
        return Err(Error::OutOfBounds(format!(
            "{:?} in {}x{}",
            region,
            img.width(),
            img.height()
        )));
    }
    let ch = img.channels();
    let mut samples = Vec::with_capacity(region.size * region.size * ch);
    for r in region.origin_row..region.origin_row + region.size {
        let row = img.row(r);
        samples.extend_from_slice(&row[region.origin_col * ch..(region.origin_col + region.size) * ch]);
    }
    Ok(RasterImage::from_parts(
        region.size,
        region.size,
        ch,
        img.bit_depth(),
        samples,
    ))
}

/// Same crop applied to a mask grid.
pub fn crop_grid(grid: &BitGrid, region: TileRegion) -> Result<BitGrid> {
    if !region.fits(grid.width(), grid.height()) {
        return Err(Error::OutOfBounds(format!("{:?}", region)));
    }
    Ok(BitGrid::from_fn(region.size, region.size, |r, c| {
        grid.get(region.origin_row + r, region.origin_col + c)
    }))
}
