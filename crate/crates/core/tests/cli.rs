use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use genn::preprocess::{dilate, StructuringElement};
use genn::raster::{load_mask, load_raster, save_mask, save_raster, Mask, Raster};

fn genn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genn")).args(args).output().unwrap()
}

fn asset(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rules_check_accepts_shipped_rules() {
    let out = genn(&["rules-check", "--rules", &asset("rules/default.rules")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn rules_check_reports_syntax_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rules");
    fs::write(&path, "rule a -> \"x\" { area < }\n").unwrap();
    let out = genn(&["rules-check", "--rules", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn eval_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    save_mask(&Mask::new(4, 4), &a).unwrap();
    save_mask(&Mask::new(5, 4), &b).unwrap();
    let report = dir.path().join("r.txt");
    let out = genn(&["eval", "--pred", s(&a), "--truth", s(&b), "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("4x4") && err.contains("5x4"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(genn(&["rules-check", "--bogus"]).status.code(), Some(1));
    assert_eq!(genn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(genn(&[]).status.code(), Some(1));
    let help = genn(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

/// Writes 9x9 crops centered on `centers` (every `step`-th) as numbered PGMs.
fn write_crops(r: &Raster, centers: Vec<(usize, usize)>, step: usize, dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let inside = centers.into_iter().filter(|&(x, y)| x >= 4 && y >= 4 && x + 4 < r.width() && y + 4 < r.height());
    for (i, (x, y)) in inside.step_by(step).enumerate() {
        save_raster(&r.crop(x - 4, y - 4, 9, 9).unwrap(), dir.join(format!("{i:05}.pgm"))).unwrap();
    }
}

fn pixels(m: &Mask, f: impl Fn(bool) -> bool) -> Vec<(usize, usize)> {
    (0..m.height()).flat_map(|y| (0..m.width()).map(move |x| (x, y))).filter(|&(x, y)| f(m.get(x, y))).collect()
}

struct Chain {
    dir: tempfile::TempDir,
}

impl Chain {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run() -> Chain {
        let c = Chain { dir: tempfile::tempdir().unwrap() };
        let ok = |args: &[&str]| {
            let out = genn(args);
            assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            out
        };
        ok(&["synth", "--spec", &asset("scenes/road_train.scene"), "--out-dir", s(&c.path("train"))]);
        ok(&["synth", "--spec", &asset("scenes/road.scene"), "--out-dir", s(&c.path("test"))]);

        let raster = load_raster(c.path("train/scene.pgm")).unwrap();
        let truth = load_mask(c.path("train/truth_road.pgm")).unwrap();
        let visible = Mask::from_fn(truth.width(), truth.height(), |x, y| truth.get(x, y) && raster.get(x, y) > 0);
        let near = dilate(&truth, &StructuringElement::disk(4));
        write_crops(&raster, pixels(&visible, |v| v), 2, &c.path("pos"));
        let edge: Vec<_> = pixels(&near, |v| v).into_iter().filter(|&(x, y)| !truth.get(x, y)).collect();
        write_crops(&raster, edge, 4, &c.path("neg"));
        write_crops(&raster, pixels(&near, |v| !v), 97, &c.path("neg_far"));
        for e in fs::read_dir(c.path("neg_far")).unwrap() {
            let e = e.unwrap().path();
            fs::rename(&e, c.path("neg").join(format!("far_{}", e.file_name().unwrap().to_string_lossy()))).unwrap();
        }

        for name in ["a.genn", "b.genn"] {
            ok(&[
                "train", "--class", "road", "--positives", s(&c.path("pos")), "--negatives", s(&c.path("neg")),
                "--window", "9", "--out", s(&c.path(name)), "--seed", "3", "--epochs", "400", "--target-mse", "0.002",
            ]);
        }
        for (mask, bundle) in [("mask_a.pgm", "a.genn"), ("mask_b.pgm", "b.genn")] {
            ok(&[
                "extract", "--bundle", s(&c.path(bundle)), "--input", s(&c.path("test/scene.pgm")),
                "--rules", &asset("rules/default.rules"), "--out-mask", s(&c.path(mask)),
                "--bridge-gap", "16", "--overlay", s(&c.path("overlay.pgm")),
            ]);
        }
        ok(&[
            "eval", "--pred", s(&c.path("mask_a.pgm")), "--truth", s(&c.path("test/truth_road.pgm")),
            "--pixel-size", "10", "--report", s(&c.path("report.txt")),
        ]);
        c
    }
}

#[test]
fn synth_train_extract_eval_chain() {
    let c = Chain::run();

    let report = fs::read_to_string(c.path("report.txt")).unwrap();
    let row = report.lines().find(|l| l.starts_with("NN extraction")).unwrap();
    let oa: f64 = row.split_whitespace().last().unwrap().parse().unwrap();
    assert!(oa >= 90.0, "{report}");

    assert_eq!(fs::read(c.path("a.genn")).unwrap(), fs::read(c.path("b.genn")).unwrap());
    assert_eq!(fs::read(c.path("mask_a.pgm")).unwrap(), fs::read(c.path("mask_b.pgm")).unwrap());

    // the scene already spans 0..=255, so the display stretch is the identity
    let input = load_raster(c.path("test/scene.pgm")).unwrap();
    assert_eq!(input.data().iter().min(), Some(&0));
    assert_eq!(input.data().iter().max(), Some(&255));
    let overlay = load_raster(c.path("overlay.pgm")).unwrap();
    let mask = load_mask(c.path("mask_a.pgm")).unwrap();
    for (i, (a, b)) in input.data().iter().zip(overlay.data()).enumerate() {
        if a != b {
            assert!(mask.bits()[i], "pixel {i} changed outside the mask");
        }
    }
}
