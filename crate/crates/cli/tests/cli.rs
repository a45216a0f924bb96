use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use seamforge_core::codec::{
    decode_image, decode_seam_mask, encode_binary_mask, encode_image, Container, DecodeOptions,
};
use seamforge_core::metrics::{confusion_buffered, confusion_plain, derive_metrics};
use seamforge_core::{BitDepth, BitGrid, RasterImage};

fn seamforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seamforge"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_image(path: &Path, w: usize, h: usize) {
    let img = RasterImage::from_fn(w, h, 3, BitDepth::Eight, |r, c, k| {
        (((r * 31 + c * 17 + k * 7) ^ (r * c)) % 256) as f64 / 255.0
    })
    .unwrap();
    fs::write(path, encode_image(&img, Container::Png).unwrap()).unwrap();
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn forge_retarget_writes_full_size_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tile.png");
    write_image(&input, 512, 512);
    let out = dir.path().join("out");
    let o = seamforge(&[
        "forge",
        "--input",
        p(&input),
        "--out",
        p(&out),
        "--kind",
        "retarget",
        "--ratio",
        "0.10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("removed 51 seams, inserted 51 seams"));
    let forged = decode_image(
        &fs::read(out.join("tile_forged.png")).unwrap(),
        DecodeOptions::default(),
    )
    .unwrap();
    assert_eq!(forged.dims(), (512, 512));
    let mask = decode_seam_mask(&fs::read(out.join("tile_mask.png")).unwrap()).unwrap();
    assert_eq!(mask.dims(), (512, 512));
    assert_eq!(
        fs::read_to_string(out.join("tile.seams.jsonl"))
            .unwrap()
            .lines()
            .count(),
        102
    );
    assert!(fs::read_to_string(out.join("tile.recipe.json"))
        .unwrap()
        .contains("retarget"));
}

#[test]
fn eval_identical_masks_gives_unit_mcc() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tile.png");
    write_image(&input, 48, 32);
    let out = dir.path().join("out");
    let o = seamforge(&[
        "forge",
        "--input",
        p(&input),
        "--out",
        p(&out),
        "--kind",
        "retarget",
        "--ratio",
        "0.1",
    ]);
    assert!(o.status.success());
    let gt_path = out.join("tile_mask.png");
    let gt = decode_seam_mask(&fs::read(&gt_path).unwrap()).unwrap().union();
    let pred_path = dir.path().join("pred.png");
    fs::write(&pred_path, encode_binary_mask(&gt).unwrap()).unwrap();

    let o = seamforge(&[
        "eval",
        "--pred",
        p(&pred_path),
        "--gt",
        p(&gt_path),
        "--buffer",
        "1",
        "--format",
        "records",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.contains("mcc=1")), "{text}");

    let o = seamforge(&[
        "eval",
        "--pred",
        p(&pred_path),
        "--gt",
        p(&gt_path),
        "--trajectories",
        p(&out.join("tile.seams.jsonl")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("mcc        1"));
    assert!(stdout(&o).contains("sls"));
}

#[test]
fn eval_records_match_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let gt = BitGrid::from_fn(20, 12, |r, c| c == 5 + r % 3);
    let pred = BitGrid::from_fn(20, 12, |r, c| c == 6 || (r == 2 && c == 15));
    let (gt_path, pred_path) = (dir.path().join("gt.png"), dir.path().join("pred.png"));
    let mask = seamforge_core::SeamMask::new(gt.clone(), BitGrid::new(20, 12)).unwrap();
    fs::write(&gt_path, seamforge_core::codec::encode_seam_mask(&mask).unwrap()).unwrap();
    fs::write(&pred_path, encode_binary_mask(&pred).unwrap()).unwrap();

    let o = seamforge(&[
        "eval",
        "--pred",
        p(&pred_path),
        "--gt",
        p(&gt_path),
        "--buffer",
        "2",
        "--format",
        "records",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let expected = [
        derive_metrics(confusion_plain(&pred, &gt).unwrap()).to_record(),
        derive_metrics(confusion_buffered(&pred, &gt, 2).unwrap())
            .with_buffer(2)
            .to_record(),
    ];
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), expected);
}

#[test]
fn usage_errors_exit_two_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tile.png");
    write_image(&input, 40, 30);
    let out = dir.path().join("out");
    let cases: Vec<Vec<&str>> = vec![
        vec!["forge", "--input", p(&input), "--out", p(&out), "--ratio", "0.1"],
        vec!["forge", "--input", p(&input), "--out", p(&out), "--kind", "retarget"],
        vec![
            "forge",
            "--input",
            p(&input),
            "--out",
            p(&out),
            "--kind",
            "retarget",
            "--ratio",
            "1.5",
        ],
        vec![
            "forge",
            "--input",
            p(&input),
            "--out",
            p(&out),
            "--kind",
            "object-displacement",
            "--shift",
            "2",
        ],
        vec![
            "forge",
            "--input",
            p(&input),
            "--out",
            p(&out),
            "--kind",
            "retarget",
            "--ratio",
            "0.1",
            "--variant",
            "fancy",
        ],
        vec!["carve", "--input", p(&input), "--out", "x.bmp", "--ratio", "0.1"],
        vec![
            "dataset",
            "--input",
            p(dir.path()),
            "--out",
            p(&out),
            "--post",
            "jpeg:0",
        ],
        vec!["dataset", "--input", p(dir.path()), "--out", p(&out), "--jobs", "0"],
        vec!["eval", "--pred", "a.png"],
        vec!["bogus"],
    ];
    for args in cases {
        let o = seamforge(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!out.exists(), "{args:?} wrote output");
    }
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tile.png");
    write_image(&input, 20, 20);
    let out = dir.path().join("out");
    let missing = dir.path().join("missing.png");
    let o = seamforge(&[
        "forge",
        "--input",
        p(&missing),
        "--out",
        p(&out),
        "--kind",
        "retarget",
        "--ratio",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));

    // Object spanning the whole width cannot be removed.
    let wide = dir.path().join("wide.png");
    fs::write(
        &wide,
        encode_binary_mask(&BitGrid::from_fn(20, 20, |r, _| r == 3)).unwrap(),
    )
    .unwrap();
    let o = seamforge(&[
        "forge",
        "--input",
        p(&input),
        "--out",
        p(&out),
        "--kind",
        "object-removal",
        "--removal-mask",
        p(&wide),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn carve_resizes_both_ways() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_image(&input, 40, 30);
    let out = dir.path().join("out.png");
    let dims = |args: &[&str]| {
        let mut full = vec!["carve", "--input", p(&input), "--out", p(&out)];
        full.extend_from_slice(args);
        let o = seamforge(&full);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        decode_image(&fs::read(&out).unwrap(), DecodeOptions::default())
            .unwrap()
            .dims()
    };
    assert_eq!(dims(&["--ratio", "0.25"]), (30, 30));
    assert_eq!(
        dims(&["--ratio", "0.25", "--enlarge", "--variant", "saliency"]),
        (50, 30)
    );
    assert_eq!(
        dims(&["--ratio", "0.1", "--horizontal", "--variant", "merge"]),
        (40, 27)
    );
}

#[test]
fn dataset_subcommand_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir(&src).unwrap();
    write_image(&src.join("a.png"), 64, 64);
    write_image(&src.join("b.png"), 64, 32);
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = seamforge(&[
            "dataset",
            "--input",
            p(&src),
            "--out",
            p(&out),
            "--tile-size",
            "32",
            "--ratio",
            "0.2",
            "--post",
            "rotate:90",
            "--post",
            "jpeg:85",
            "--seed",
            "9",
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("12 entries written, 0 failed"));
        fs::read(out.join("manifest/manifest.jsonl")).unwrap()
    };
    assert_eq!(run("one", "1"), run("four", "4"));
}
