use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use seamforge_core::carver::{CarveSession, Orientation, SeamBias};
use seamforge_core::codec::{
    decode_binary_mask, decode_image, decode_seam_mask, encode_image, encode_seam_mask, Container, DecodeOptions,
};
use seamforge_core::dataset::{generate_dataset, DatasetConfig, PostProcess, SplitRatios, TileStrategy};
use seamforge_core::forgery::{
    object_displacement_forgery, object_removal_forgery, parse_trajectories, retarget_forgery, write_trajectories,
    Direction, ForgeryResult,
};
use seamforge_core::metrics::{
    confusion_buffered, confusion_plain, dataset_aggregate, sls_image, MetricReport, SeamTrajectory,
};
use seamforge_core::{BitGrid, MaskKind, RasterImage, Variant};

#[derive(Parser)]
#[command(
    name = "seamforge",
    version,
    about = "Seam-carving forgery synthesis and localization scoring"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shrink or enlarge an image by seams.
    Carve(CarveArgs),
    /// Apply a forgery recipe and write the forged image with its ground truth.
    Forge(ForgeArgs),
    /// Tile a directory of images into a forgery dataset.
    Dataset(DatasetArgs),
    /// Score predicted seam masks against ground-truth masks.
    Eval(EvalArgs),
}

#[derive(Args)]
struct CarveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output image (.png, .tif or .tiff).
    #[arg(long)]
    out: PathBuf,
    /// Fraction of the width (height with --horizontal) to carve.
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value = "forward")]
    variant: Variant,
    /// Insert seams instead of removing them.
    #[arg(long)]
    enlarge: bool,
    /// Carve rows instead of columns.
    #[arg(long)]
    horizontal: bool,
    #[arg(long)]
    removal_mask: Option<PathBuf>,
    #[arg(long)]
    protective_mask: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Retarget,
    ObjectRemoval,
    ObjectDisplacement,
}

#[derive(Args)]
struct ForgeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value = "forward")]
    variant: Variant,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    removal_mask: Option<PathBuf>,
    #[arg(long)]
    protective_mask: Option<PathBuf>,
    #[arg(long)]
    object_mask: Option<PathBuf>,
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long)]
    shift: Option<usize>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Directory of source images.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    tile_size: usize,
    /// Draw this many random tiles per image instead of a non-overlapping grid.
    #[arg(long)]
    tiles: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    #[arg(long, default_value = "forward")]
    variant: Variant,
    /// Train:val:test proportions, e.g. 80:10:10.
    #[arg(long, default_value = "80:10:10")]
    splits: SplitRatios,
    /// Post-processing step, `jpeg:<quality>` or `rotate:<degrees>`; repeatable, applied in order.
    #[arg(long)]
    post: Vec<PostProcess>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Skip the untouched negative tiles.
    #[arg(long)]
    no_pristine: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted mask; any non-zero pixel is positive. Repeatable.
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth seam mask, paired with --pred by position.
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    /// Buffer radius in pixels for the buffered report.
    #[arg(long)]
    buffer: Option<usize>,
    /// Seam trajectory sidecar, paired with --pred by position.
    #[arg(long)]
    trajectories: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let outcome = match cli.command {
        Command::Carve(args) => carve(args),
        Command::Forge(args) => forge(args, cli.seed),
        Command::Dataset(args) => dataset(args, cli.seed),
        Command::Eval(args) => eval(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_image(path: &Path) -> anyhow::Result<RasterImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_image(&bytes, DecodeOptions::default()).with_context(|| format!("decoding {}", path.display()))
}

fn read_mask(path: &Path, kind: MaskKind) -> anyhow::Result<BitGrid> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(decode_binary_mask(&bytes, kind)
        .with_context(|| format!("decoding {}", path.display()))?
        .grid)
}

fn read_optional(path: Option<&PathBuf>, kind: MaskKind) -> anyhow::Result<Option<BitGrid>> {
    path.map(|p| read_mask(p, kind)).transpose()
}

fn container_for(path: &Path) -> Result<Container, Failure> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(Container::Png),
        Some("tif" | "tiff") => Ok(Container::Tiff),
        _ => Err(usage(format!(
            "{}: output must end in .png, .tif or .tiff",
            path.display()
        ))),
    }
}

fn check_ratio(ratio: f64) -> Result<(), Failure> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--ratio {ratio} must lie in (0, 1)")))
    }
}

fn carve(args: CarveArgs) -> Result<(), Failure> {
    check_ratio(args.ratio)?;
    let container = container_for(&args.out)?;
    if args.enlarge && args.removal_mask.is_some() {
        return Err(usage("--removal-mask only applies when shrinking"));
    }
    let flip = |img: RasterImage| if args.horizontal { img.transposed() } else { img };
    let flip_mask = |m: Option<BitGrid>| m.map(|g| if args.horizontal { g.transposed() } else { g });

    let img = flip(read_image(&args.input)?);
    let removal = flip_mask(read_optional(args.removal_mask.as_ref(), MaskKind::Removal)?);
    let protective = flip_mask(read_optional(args.protective_mask.as_ref(), MaskKind::Protective)?);
    let k = (args.ratio * img.width() as f64).round() as usize;
    if k == 0 {
        return Err(usage(format!(
            "--ratio {} carves no seams from {} pixels",
            args.ratio,
            img.width()
        )));
    }
    let bias = SeamBias {
        removal: removal.as_ref(),
        protective: protective.as_ref(),
    };
    let mut session = CarveSession::new(img);
    if args.enlarge {
        session.enlarge(k, args.variant, bias).map_err(anyhow::Error::from)?;
    } else {
        session.reduce(k, args.variant, bias).map_err(anyhow::Error::from)?;
    }
    let out = flip(session.image().clone());
    let bytes = encode_image(&out, container).map_err(anyhow::Error::from)?;
    fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))?;
    log::info!("carved {k} seams; output {}x{}", out.width(), out.height());
    Ok(())
}

fn forge(args: ForgeArgs, seed: u64) -> Result<(), Failure> {
    let need = |flag: &str, present: bool| {
        if present {
            Ok(())
        } else {
            Err(usage(format!("--kind requires {flag}")))
        }
    };
    match args.kind {
        Kind::Retarget => {
            need("--ratio", args.ratio.is_some())?;
            check_ratio(args.ratio.unwrap_or_default())?;
        }
        Kind::ObjectRemoval => need("--removal-mask", args.removal_mask.is_some())?,
        Kind::ObjectDisplacement => {
            need("--object-mask", args.object_mask.is_some())?;
            need("--direction", args.direction.is_some())?;
            need("--shift", args.shift.is_some())?;
        }
    }

    let img = read_image(&args.input)?;
    let result: ForgeryResult = match args.kind {
        Kind::Retarget => retarget_forgery(&img, args.ratio.unwrap_or_default(), args.variant, seed),
        Kind::ObjectRemoval => {
            let removal = read_optional(args.removal_mask.as_ref(), MaskKind::Removal)?.expect("checked above");
            let protective = read_optional(args.protective_mask.as_ref(), MaskKind::Protective)?;
            object_removal_forgery(&img, &removal, protective.as_ref(), args.variant)
        }
        Kind::ObjectDisplacement => {
            let object = read_optional(args.object_mask.as_ref(), MaskKind::Object)?.expect("checked above");
            let (direction, shift) = (
                args.direction.expect("checked above"),
                args.shift.expect("checked above"),
            );
            object_displacement_forgery(&img, &object, direction, shift, args.variant)
        }
    }
    .map_err(anyhow::Error::from)?;

    let stem = args.input.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    let outputs = [
        (
            format!("{stem}_forged.png"),
            encode_image(&result.forged, Container::Png).map_err(anyhow::Error::from)?,
        ),
        (
            format!("{stem}_mask.png"),
            encode_seam_mask(&result.gt).map_err(anyhow::Error::from)?,
        ),
        (
            format!("{stem}.seams.jsonl"),
            write_trajectories(&result.trajectory_records())
                .map_err(anyhow::Error::from)?
                .into_bytes(),
        ),
        (
            format!("{stem}.recipe.json"),
            serde_json::to_vec_pretty(&result.recipe).context("encoding recipe")?,
        ),
    ];
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (name, bytes) in outputs {
        let path = args.out.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "removed {} seams, inserted {} seams",
        result.removals(),
        result.insertions()
    );
    Ok(())
}

fn dataset(args: DatasetArgs, seed: u64) -> Result<(), Failure> {
    let config = DatasetConfig {
        tile_size: args.tile_size,
        strategy: match args.tiles {
            Some(0) => return Err(usage("--tiles must be positive")),
            Some(n) => TileStrategy::Random(n),
            None => TileStrategy::NonOverlapping,
        },
        ratio: args.ratio,
        variant: args.variant,
        splits: args.splits,
        post: args.post,
        seed,
        jobs: args.jobs,
        pristine: !args.no_pristine,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    if !args.input.is_dir() {
        return Err(usage(format!("{} is not a directory", args.input.display())));
    }
    let manifest = generate_dataset(&args.input, &args.out, &config).map_err(anyhow::Error::from)?;
    let failed = manifest.entries.iter().filter(|e| e.error.is_some()).count();
    println!("{} entries written, {failed} failed", manifest.entries.len());
    Ok(())
}

fn trajectories_for(path: &Path, pred: &BitGrid) -> anyhow::Result<(Vec<SeamTrajectory>, BitGrid)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records = parse_trajectories(&text).with_context(|| format!("parsing {}", path.display()))?;
    let horizontal = records
        .first()
        .is_some_and(|r| r.orientation == Orientation::Horizontal);
    if records
        .iter()
        .any(|r| (r.orientation == Orientation::Horizontal) != horizontal)
    {
        return Err(anyhow!("{}: mixed seam orientations", path.display()));
    }
    // Horizontal seams are scored as vertical seams of the transposed prediction.
    let grid = if horizontal { pred.transposed() } else { pred.clone() };
    let trajs = records
        .into_iter()
        .map(|r| SeamTrajectory::new(r.columns, grid.width()))
        .collect::<seamforge_core::Result<_>>()
        .with_context(|| format!("{} does not fit the prediction", path.display()))?;
    Ok((trajs, grid))
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    if args.pred.len() != args.gt.len() {
        return Err(usage(format!(
            "{} --pred files but {} --gt files",
            args.pred.len(),
            args.gt.len()
        )));
    }
    if !args.trajectories.is_empty() && args.trajectories.len() != args.pred.len() {
        return Err(usage("give one --trajectories file per --pred file"));
    }

    let mut plain = Vec::new();
    let mut buffered = Vec::new();
    let mut sls = Vec::new();
    for (i, (pred_path, gt_path)) in args.pred.iter().zip(&args.gt).enumerate() {
        let pred = read_mask(pred_path, MaskKind::Removal)?;
        let gt_bytes = fs::read(gt_path).with_context(|| format!("reading {}", gt_path.display()))?;
        let gt = decode_seam_mask(&gt_bytes)
            .with_context(|| format!("decoding {}", gt_path.display()))?
            .union();
        let context = || format!("{} against {}", pred_path.display(), gt_path.display());
        plain.push(confusion_plain(&pred, &gt).with_context(context)?);
        if let Some(p) = args.buffer {
            buffered.push(confusion_buffered(&pred, &gt, p).with_context(context)?);
        }
        if let Some(path) = args.trajectories.get(i) {
            let (trajs, grid) = trajectories_for(path, &pred)?;
            sls.push(sls_image(&trajs, &grid).with_context(context)?);
        }
    }

    let attach = |report: MetricReport| match sls.is_empty() {
        true => report,
        false => report.with_sls(sls.iter().sum::<f64>() / sls.len() as f64),
    };
    let mut reports = vec![attach(dataset_aggregate(&plain).map_err(anyhow::Error::from)?)];
    if let Some(p) = args.buffer {
        reports.push(attach(
            dataset_aggregate(&buffered)
                .map_err(anyhow::Error::from)?
                .with_buffer(p),
        ));
    }
    for report in reports {
        match args.format {
            Format::Text => println!("{report}"),
            Format::Records => println!("{}", report.to_record()),
        }
    }
    Ok(())
}
