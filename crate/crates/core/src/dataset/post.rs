use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::{decode_image, encode_jpeg, DecodeOptions};
use crate::error::{Error, Result};
use crate::raster::{BitGrid, RasterImage};

/// One post-processing step, written `jpeg:<quality>` or `rotate:<degrees>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PostProcess {
    Jpeg {
        quality: u8,
    },
    /// Counter-clockwise rotation about the image center.
    Rotate {
        degrees: f64,
    },
}

impl PostProcess {
    pub fn jpeg(quality: u8) -> Result<Self> {
        if !(1..=100).contains(&quality) {
            return Err(Error::InvalidArgument(format!("JPEG quality {quality} not in 1..=100")));
        }
        Ok(PostProcess::Jpeg { quality })
    }

    pub fn rotate(degrees: f64) -> Result<Self> {
        if !(0.0..360.0).contains(&degrees) {
            return Err(Error::InvalidArgument(format!("rotation {degrees} not in [0, 360)")));
        }
        Ok(PostProcess::Rotate { degrees })
    }

    /// Quarter turns when the rotation is an exact multiple of 90 degrees.
    fn quarter_turns(degrees: f64) -> Option<usize> {
        let q = degrees / 90.0;
        (q.fract() == 0.0).then_some(q as usize % 4)
    }
}

impl fmt::Display for PostProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostProcess::Jpeg { quality } => write!(f, "jpeg:{quality}"),
            PostProcess::Rotate { degrees } => write!(f, "rotate:{degrees}"),
        }
    }
}

impl std::str::FromStr for PostProcess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad post-processing step {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "jpeg" => PostProcess::jpeg(arg.parse().map_err(|_| bad())?),
            "rotate" => PostProcess::rotate(arg.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for PostProcess {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PostProcess> for String {
    fn from(p: PostProcess) -> String {
        p.to_string()
    }
}

fn quarter_turn(img: &RasterImage) -> RasterImage {
    // Counter-clockwise: output (r, c) takes input (c, w - 1 - r).
    let w = img.width();
    RasterImage::from_fn(img.height(), w, img.channels(), img.bit_depth(), |r, c, k| {
        img.sample(c, w - 1 - r, k)
    })
    .expect("permutation of a valid raster")
}

fn quarter_turn_grid(g: &BitGrid) -> BitGrid {
    let w = g.width();
    BitGrid::from_fn(g.height(), w, |r, c| g.get(c, w - 1 - r))
}

/// Source coordinate `(x, y)` of output pixel `(r, c)` for a counter-clockwise
/// rotation about the center.
fn source_point(r: usize, c: usize, w: usize, h: usize, degrees: f64) -> (f64, f64) {
    let (sin, cos) = degrees.to_radians().sin_cos();
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (dx, dy) = (c as f64 - cx, r as f64 - cy);
    (cx + dx * cos - dy * sin, cy + dx * sin + dy * cos)
}

fn rotate_image(img: &RasterImage, degrees: f64) -> RasterImage {
    if let Some(q) = PostProcess::quarter_turns(degrees) {
        return (0..q).fold(img.clone(), |acc, _| quarter_turn(&acc));
    }
    let (w, h) = img.dims();
    RasterImage::from_fn(w, h, img.channels(), img.bit_depth(), |r, c, k| {
        let (x, y) = source_point(r, c, w, h, degrees);
        // Clamping replicates edge pixels into the exposed corners.
        let x = x.clamp(0.0, (w - 1) as f64);
        let y = y.clamp(0.0, (h - 1) as f64);
        let (x0, y0) = (x.floor() as usize, y.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let top = img.sample(y0, x0, k) * (1.0 - fx) + img.sample(y0, x1, k) * fx;
        let bottom = img.sample(y1, x0, k) * (1.0 - fx) + img.sample(y1, x1, k) * fx;
        (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0)
    })
    .expect("bilinear samples stay in range")
}

/// Same geometry as the image rotation, nearest-neighbour for binary layers.
pub fn rotate_grid(g: &BitGrid, degrees: f64) -> BitGrid {
    if let Some(q) = PostProcess::quarter_turns(degrees) {
        return (0..q).fold(g.clone(), |acc, _| quarter_turn_grid(&acc));
    }
    let (w, h) = g.dims();
    BitGrid::from_fn(w, h, |r, c| {
        let (x, y) = source_point(r, c, w, h, degrees);
        let x = x.round().clamp(0.0, (w - 1) as f64) as usize;
        let y = y.round().clamp(0.0, (h - 1) as f64) as usize;
        g.get(y, x)
    })
}

/// JPEG round trip through the baseline encoder; the result is 8-bit.
pub fn jpeg_round_trip(img: &RasterImage, quality: u8) -> Result<RasterImage> {
    let bytes = encode_jpeg(img, quality)?;
    decode_image(&bytes, DecodeOptions { allow_lossy: true })
}

pub fn postprocess(img: &RasterImage, chain: &[PostProcess]) -> Result<RasterImage> {
    let mut out = img.clone();
    for step in chain {
        out = match *step {
            PostProcess::Jpeg { quality } => jpeg_round_trip(&out, quality)?,
            PostProcess::Rotate { degrees } => rotate_image(&out, degrees),
        };
    }
    Ok(out)
}

/// Peak signal-to-noise ratio in dB for unit-range samples; infinite when equal.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let n = a.samples().len() as f64;
    let mse = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}
