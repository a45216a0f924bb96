//! Batch dataset generation: tiles, group-atomic splits, forgeries,
//! post-processing and a line-delimited manifest.
//!
//! Output layout under the destination directory:
//!
//! ```text
//! images/<source>_t<tile>_{pristine,forged}.{png,jpg}
//! masks/<source>_t<tile>_{pristine,forged}.png          red/green seam mask
//! masks/<source>_t<tile>_forged.seams.jsonl             seam trajectories
//! manifest/manifest.jsonl                               one entry per line
//! ```

mod post;
mod splits;
mod tiles;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use post::{jpeg_round_trip, postprocess, psnr, rotate_grid, PostProcess};
pub use splits::{assign_splits, Split, SplitRatios};
pub use tiles::{derive_seed, extract_tiles, seeded_rng, TileStrategy};

use crate::carver::Variant;
use crate::codec::{decode_image, encode_image, encode_jpeg, encode_seam_mask, Container, DecodeOptions};
use crate::error::{Error, Result};
use crate::forgery::{retarget_forgery, write_trajectories, ForgeryRecipe};
use crate::raster::{crop, RasterImage, SeamMask, TileRegion};

const SOURCE_EXTENSIONS: [&str; 5] = ["png", "tif", "tiff", "jpg", "jpeg"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub tile_size: usize,
    pub strategy: TileStrategy,
    pub ratio: f64,
    pub variant: Variant,
    pub splits: SplitRatios,
    pub post: Vec<PostProcess>,
    pub seed: u64,
    /// Worker threads; output bytes do not depend on it.
    pub jobs: usize,
    /// Also emit the untouched tile as a negative sample.
    pub pristine: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            tile_size: 512,
            strategy: TileStrategy::NonOverlapping,
            ratio: 0.1,
            variant: Variant::Forward,
            splits: SplitRatios::default(),
            post: Vec::new(),
            seed: 0,
            jobs: 1,
            pristine: true,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 {
            return Err(Error::InvalidArgument("tile size must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidArgument("jobs must be at least 1".into()));
        }
        if !(self.ratio > 0.0 && self.ratio <= 0.5) {
            return Err(Error::InvalidArgument(format!("ratio {} outside (0, 0.5]", self.ratio)));
        }
        SplitRatios::new(self.splits.train, self.splits.val, self.splits.test)?;
        Ok(())
    }
}

mod pristine_or_recipe {
    use super::ForgeryRecipe;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Tag(String),
        Recipe(ForgeryRecipe),
    }

    pub fn serialize<S: Serializer>(recipe: &Option<ForgeryRecipe>, s: S) -> Result<S::Ok, S::Error> {
        match recipe {
            None => s.serialize_str("pristine"),
            Some(r) => r.serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ForgeryRecipe>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Tag(t) if t == "pristine" => Ok(None),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown recipe tag {t:?}"))),
            Repr::Recipe(r) => Ok(Some(r)),
        }
    }
}

/// One manifest line. Paths are relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source: String,
    pub tile_index: usize,
    pub region: TileRegion,
    pub split: Split,
    /// `"pristine"` for untouched tiles.
    #[serde(with = "pristine_or_recipe")]
    pub recipe: Option<ForgeryRecipe>,
    pub image: Option<String>,
    pub mask: Option<String>,
    pub trajectories: Option<String>,
    pub post: Vec<PostProcess>,
    pub seed: u64,
    pub removals: usize,
    pub insertions: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.join("manifest").join("manifest.jsonl")
}

struct Source {
    id: String,
    path: PathBuf,
}

fn list_sources(dir: &Path) -> Result<Vec<Source>> {
    let mut sources = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !path.is_file() || !ext.is_some_and(|e| SOURCE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidArgument(format!("non UTF-8 file name {}", path.display())))?
            .to_string();
        sources.push(Source { id, path });
    }
    sources.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.path.cmp(&b.path)));
    if let Some(w) = sources.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::InvalidArgument(format!(
            "two sources share the id {:?}",
            w[0].id
        )));
    }
    Ok(sources)
}

struct WorkItem<'a> {
    source_index: usize,
    source: &'a Source,
    image: &'a RasterImage,
    tile_index: usize,
    region: TileRegion,
    split: Split,
}

/// Applies the chain; a trailing JPEG step is kept as the stored bitstream.
fn render(img: &RasterImage, chain: &[PostProcess]) -> Result<(Vec<u8>, &'static str)> {
    match chain.split_last() {
        Some((PostProcess::Jpeg { quality }, head)) => Ok((encode_jpeg(&postprocess(img, head)?, *quality)?, "jpg")),
        _ => Ok((encode_image(&postprocess(img, chain)?, Container::Png)?, "png")),
    }
}

fn warp_mask(mask: &SeamMask, chain: &[PostProcess]) -> SeamMask {
    chain.iter().fold(mask.clone(), |m, step| match *step {
        PostProcess::Rotate { degrees } => SeamMask {
            removed: rotate_grid(&m.removed, degrees),
            inserted: rotate_grid(&m.inserted, degrees),
        },
        PostProcess::Jpeg { .. } => m,
    })
}

fn write_sample(
    out: &Path,
    stem: &str,
    img: &RasterImage,
    gt: &SeamMask,
    config: &DatasetConfig,
) -> Result<(String, String)> {
    let (bytes, ext) = render(img, &config.post)?;
    let image = format!("images/{stem}.{ext}");
    fs::write(out.join(&image), bytes)?;
    let mask = format!("masks/{stem}.png");
    fs::write(out.join(&mask), encode_seam_mask(&warp_mask(gt, &config.post))?)?;
    Ok((image, mask))
}

fn process(item: &WorkItem, out: &Path, config: &DatasetConfig) -> Vec<ManifestEntry> {
    let stem = format!("{}_t{}", item.source.id, item.tile_index);
    let seed = derive_seed(config.seed, ((item.source_index as u64) << 32) | item.tile_index as u64);
    let blank = |id: String, recipe| ManifestEntry {
        id,
        source: item.source.id.clone(),
        tile_index: item.tile_index,
        region: item.region,
        split: item.split,
        recipe,
        image: None,
        mask: None,
        trajectories: None,
        post: config.post.clone(),
        seed,
        removals: 0,
        insertions: 0,
        error: None,
    };
    let fail = |mut e: ManifestEntry, err: Error| {
        log::warn!("{}: {err}", e.id);
        e.error = Some(err.to_string());
        e
    };

    let tile = match crop(item.image, item.region) {
        Ok(t) => t,
        Err(err) => return vec![fail(blank(stem, None), err)],
    };
    let mut entries = Vec::new();
    if config.pristine {
        let id = format!("{stem}_pristine");
        let mut e = blank(id.clone(), None);
        let empty = SeamMask::empty(tile.width(), tile.height());
        entries.push(match write_sample(out, &id, &tile, &empty, config) {
            Ok((image, mask)) => {
                e.image = Some(image);
                e.mask = Some(mask);
                e
            }
            Err(err) => fail(e, err),
        });
    }

    let id = format!("{stem}_forged");
    let recipe = ForgeryRecipe {
        kind: crate::forgery::RecipeKind::Retarget { ratio: config.ratio },
        variant: config.variant,
        seed,
    };
    let mut e = blank(id.clone(), Some(recipe));
    let written = retarget_forgery(&tile, config.ratio, config.variant, seed).and_then(|res| {
        let (image, mask) = write_sample(out, &id, &res.forged, &res.gt, config)?;
        let traj = format!("masks/{id}.seams.jsonl");
        fs::write(out.join(&traj), write_trajectories(&res.trajectory_records())?)?;
        Ok((image, mask, traj, res.removals(), res.insertions()))
    });
    entries.push(match written {
        Ok((image, mask, traj, removals, insertions)) => {
            e.image = Some(image);
            e.mask = Some(mask);
            e.trajectories = Some(traj);
            e.removals = removals;
            e.insertions = insertions;
            e
        }
        Err(err) => fail(e, err),
    });
    entries
}

/// Forges every tile of every image in `sources`, writes samples under `out`
/// and returns (and writes) the manifest. Failures are recorded on the entry
/// they affect and the run continues.
pub fn generate_dataset(sources: &Path, out: &Path, config: &DatasetConfig) -> Result<DatasetManifest> {
    config.validate()?;
    let listed = list_sources(sources)?;
    for dir in ["images", "masks", "manifest"] {
        fs::create_dir_all(out.join(dir))?;
    }
    if listed.is_empty() {
        log::warn!("no source images found in {}", sources.display());
        let manifest = DatasetManifest::default();
        fs::write(manifest_path(out), manifest.to_jsonl()?)?;
        return Ok(manifest);
    }

    let ids: Vec<String> = listed.iter().map(|s| s.id.clone()).collect();
    let splits = assign_splits(&ids, config.splits, config.seed)?;

    let mut entries = Vec::new();
    let mut decoded = Vec::with_capacity(listed.len());
    for (index, source) in listed.iter().enumerate() {
        let loaded = fs::read(&source.path)
            .map_err(Error::from)
            .and_then(|bytes| decode_image(&bytes, DecodeOptions { allow_lossy: true }))
            .and_then(|img| {
                let seed = derive_seed(config.seed, index as u64 + 2);
                let regions = extract_tiles(img.dims(), config.tile_size, config.strategy, seed)?;
                Ok((img, regions))
            });
        match loaded {
            Ok((img, regions)) => decoded.push((index, source, img, regions)),
            Err(err) => {
                log::warn!("{}: {err}", source.id);
                entries.push((
                    index,
                    ManifestEntry {
                        id: source.id.clone(),
                        source: source.id.clone(),
                        tile_index: 0,
                        region: TileRegion::new(0, 0, config.tile_size),
                        split: splits[&source.id],
                        recipe: None,
                        image: None,
                        mask: None,
                        trajectories: None,
                        post: config.post.clone(),
                        seed: config.seed,
                        removals: 0,
                        insertions: 0,
                        error: Some(err.to_string()),
                    },
                ));
            }
        }
    }

    let items: Vec<WorkItem> = decoded
        .iter()
        .flat_map(|(index, source, img, regions)| {
            regions.iter().enumerate().map(|(tile_index, &region)| WorkItem {
                source_index: *index,
                source,
                image: img,
                tile_index,
                region,
                split: splits[&source.id],
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let produced: Vec<(usize, Vec<ManifestEntry>)> = pool.install(|| {
        items
            .par_iter()
            .map(|item| (item.source_index, process(item, out, config)))
            .collect()
    });

    entries.extend(
        produced
            .into_iter()
            .flat_map(|(i, es)| es.into_iter().map(move |e| (i, e))),
    );
    // Stable: failed sources sort with their index, tiles keep their order.
    entries.sort_by_key(|(i, _)| *i);
    let manifest = DatasetManifest {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    };
    fs::write(manifest_path(out), manifest.to_jsonl()?)?;
    Ok(manifest)
}
