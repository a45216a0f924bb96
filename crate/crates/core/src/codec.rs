//! Container decoding/encoding for rasters and the red/green seam mask files.

use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::codecs::tiff::TiffEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use crate::error::{Error, Result};
use crate::raster::{BitDepth, BitGrid, MaskKind, PixelMask, RasterImage, SeamMask};

/// Lossless containers the raster can be written to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Container {
    Png,
    Tiff,
}

impl Container {
    pub fn extension(self) -> &'static str {
        match self {
            Container::Png => "png",
            Container::Tiff => "tif",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DecodeOptions {
    /// Accept JPEG input. Off by default: forensic inputs should be lossless.
    pub allow_lossy: bool,
}

pub const RED: [u8; 3] = [255, 0, 0];
pub const GREEN: [u8; 3] = [0, 255, 0];
pub const YELLOW: [u8; 3] = [255, 255, 0];
pub const BLACK: [u8; 3] = [0, 0, 0];

fn load(bytes: &[u8], options: DecodeOptions) -> Result<DynamicImage> {
    let format = image::guess_format(bytes)
        .map_err(|_| Error::UnsupportedContainer(String::from(" (unrecognized signature)")))?;
    match format {
        ImageFormat::Png | ImageFormat::Tiff => {}
        ImageFormat::Jpeg if options.allow_lossy => {}
        ImageFormat::Jpeg => {
            return Err(Error::UnsupportedContainer(String::from(
                " (JPEG is lossy; enable allow_lossy to accept it)",
            )))
        }
        other => return Err(Error::UnsupportedContainer(format!(" {other:?}"))),
    }
    image::load_from_memory_with_format(bytes, format).map_err(|e| Error::CorruptStream(e.to_string()))
}

/// Decodes a PNG/TIFF (or, when allowed, JPEG) stream into a unit-normalized raster.
pub fn decode_image(bytes: &[u8], options: DecodeOptions) -> Result<RasterImage> {
    let dynamic = load(bytes, options)?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let scale8 = |v: &u8| *v as f64 / 255.0;
    let scale16 = |v: &u16| *v as f64 / 65535.0;
    let (channels, depth, samples): (usize, BitDepth, Vec<f64>) = match &dynamic {
        DynamicImage::ImageLuma8(buf) => (1, BitDepth::Eight, buf.as_raw().iter().map(scale8).collect()),
        DynamicImage::ImageRgb8(buf) => (3, BitDepth::Eight, buf.as_raw().iter().map(scale8).collect()),
        DynamicImage::ImageLuma16(buf) => (1, BitDepth::Sixteen, buf.as_raw().iter().map(scale16).collect()),
        DynamicImage::ImageRgb16(buf) => (3, BitDepth::Sixteen, buf.as_raw().iter().map(scale16).collect()),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => return Err(Error::UnsupportedChannels(2)),
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageRgba16(_) | DynamicImage::ImageRgba32F(_) => {
            return Err(Error::UnsupportedChannels(4))
        }
        other => return Err(Error::UnsupportedSampleFormat(format!("{:?}", other.color()))),
    };
    RasterImage::new(w, h, channels, depth, samples)
}

fn quantize8(img: &RasterImage) -> Vec<u8> {
    img.samples().iter().map(|s| (s * 255.0).round() as u8).collect()
}

fn quantize16_ne(img: &RasterImage) -> Vec<u8> {
    img.samples()
        .iter()
        .flat_map(|s| ((s * 65535.0).round() as u16).to_ne_bytes())
        .collect()
}

fn color_type(img: &RasterImage, depth: BitDepth) -> ExtendedColorType {
    match (img.channels(), depth) {
        (1, BitDepth::Eight) => ExtendedColorType::L8,
        (1, BitDepth::Sixteen) => ExtendedColorType::L16,
        (_, BitDepth::Eight) => ExtendedColorType::Rgb8,
        (_, BitDepth::Sixteen) => ExtendedColorType::Rgb16,
    }
}

/// Encodes at the raster's declared bit depth.
pub fn encode_image(img: &RasterImage, container: Container) -> Result<Vec<u8>> {
    let depth = img.bit_depth();
    let raw = match depth {
        BitDepth::Eight => quantize8(img),
        BitDepth::Sixteen => quantize16_ne(img),
    };
    let (w, h) = (img.width() as u32, img.height() as u32);
    let ct = color_type(img, depth);
    let mut out = Vec::new();
    match container {
        Container::Png => PngEncoder::new(&mut out)
            .write_image(&raw, w, h, ct)
            .map_err(|e| Error::Encode(e.to_string()))?,
        Container::Tiff => {
            let mut cursor = Cursor::new(&mut out);
            TiffEncoder::new(&mut cursor)
                .write_image(&raw, w, h, ct)
                .map_err(|e| Error::Encode(e.to_string()))?
        }
    }
    Ok(out)
}

/// Baseline JPEG at `quality` (1..=100). 16-bit rasters are reduced to 8 bits.
pub fn encode_jpeg(img: &RasterImage, quality: u8) -> Result<Vec<u8>> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidArgument(format!("JPEG quality {quality} not in 1..=100")));
    }
    let raw = quantize8(img);
    let mut out = Vec::new();
    JpegEncoder::new_with_quality(&mut out, quality)
        .write_image(
            &raw,
            img.width() as u32,
            img.height() as u32,
            color_type(img, BitDepth::Eight),
        )
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

/// Red = removed-adjacent, green = inserted, yellow = both, black = neither.
pub fn encode_seam_mask(mask: &SeamMask) -> Result<Vec<u8>> {
    let (w, h) = mask.dims();
    let mut raw = Vec::with_capacity(w * h * 3);
    for r in 0..h {
        for c in 0..w {
            let color = match (mask.removed.get(r, c), mask.inserted.get(r, c)) {
                (true, true) => YELLOW,
                (true, false) => RED,
                (false, true) => GREEN,
                (false, false) => BLACK,
            };
            raw.extend_from_slice(&color);
        }
    }
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&raw, w as u32, h as u32, ExtendedColorType::Rgb8)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

/// Inverse of [`encode_seam_mask`]; any color outside the four-color palette is an error.
pub fn decode_seam_mask(bytes: &[u8]) -> Result<SeamMask> {
    let rgb = match load(bytes, DecodeOptions::default())? {
        DynamicImage::ImageRgb8(buf) => buf,
        other => {
            return Err(Error::UnsupportedSampleFormat(format!(
                "seam mask must be 8-bit RGB, found {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut removed = BitGrid::new(w, h);
    let mut inserted = BitGrid::new(w, h);
    for (c, r, px) in rgb.enumerate_pixels() {
        let (r, c) = (r as usize, c as usize);
        let (rem, ins) = match px.0 {
            RED => (true, false),
            GREEN => (false, true),
            YELLOW => (true, true),
            BLACK => (false, false),
            _ => return Err(Error::InvalidMaskColor { row: r, col: c }),
        };
        removed.set(r, c, rem);
        inserted.set(r, c, ins);
    }
    SeamMask::new(removed, inserted)
}

/// Any non-zero pixel (in any channel, alpha ignored) is set.
pub fn decode_binary_mask(bytes: &[u8], kind: MaskKind) -> Result<PixelMask> {
    let dynamic = load(bytes, DecodeOptions::default())?;
    let rgb = dynamic.to_rgb16();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let grid = BitGrid::from_fn(w, h, |r, c| rgb.get_pixel(c as u32, r as u32).0.iter().any(|&v| v != 0));
    Ok(PixelMask::new(kind, grid))
}

/// Single-channel 8-bit PNG with set pixels at 255.
pub fn encode_binary_mask(grid: &BitGrid) -> Result<Vec<u8>> {
    let raw: Vec<u8> = grid.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&raw, grid.width() as u32, grid.height() as u32, ExtendedColorType::L8)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}
