//! Command-line driver. Exit codes: 0 success, 1 usage error, 2 processing
//! error. Diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{accuracy_report, areal_extent, confusion_matrix, format_report, ArealComparison};
use crate::pipeline::{
    extract_with_rules, load_bundle, overlay, save_bundle, train_pipeline, BridgeParams, SomSpec, TrainParams,
};
use crate::preprocess::CannyParams;
use crate::raster::{load_mask, load_raster, save_mask, save_raster, Raster};
use crate::rules::parse_rules;
use crate::scene::{generate_scene, parse_scene};
use crate::som::SomConfig;

#[derive(Debug, Parser)]
#[command(name = "genn", version, about = "Neural-network feature extraction for grayscale imagery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic scene and its per-kind truth masks.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Train a per-class model bundle from exemplar patches.
    Train {
        #[arg(long = "class")]
        class_name: String,
        /// Directory of positive exemplar PGMs.
        #[arg(long)]
        positives: PathBuf,
        /// Directory of negative exemplar PGMs.
        #[arg(long)]
        negatives: PathBuf,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// SOM grid as ROWSxCOLS.
        #[arg(long)]
        som: Option<String>,
        /// Stop once an epoch's mean squared error reaches this value.
        #[arg(long = "target-mse")]
        target_mse: Option<f64>,
        /// GLCM gray levels.
        #[arg(long)]
        levels: Option<usize>,
        /// GLCM offset as DX,DY.
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<String>,
        /// Clear Canny edges from the accepted mask: SIGMA,LOW,HIGH.
        #[arg(long)]
        canny: Option<String>,
        /// Open the accepted mask with a square of this side.
        #[arg(long)]
        open: Option<usize>,
        /// Histogram stretch percentiles as LOW,HIGH.
        #[arg(long)]
        stretch: Option<String>,
        /// Default accept threshold stored in the bundle.
        #[arg(long)]
        threshold: Option<f64>,
        /// Rule file packaged into the bundle (default: the shipped rules).
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Extract features from an image with a trained bundle.
    Extract {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long = "out-mask")]
        out_mask: PathBuf,
        /// Enable gap bridging with this maximum endpoint distance.
        #[arg(long = "bridge-gap")]
        bridge_gap: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Compare a predicted mask against truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Pixel side in meters; adds an areal-extent comparison.
        #[arg(long = "pixel-size")]
        pixel_size: Option<f64>,
        #[arg(long)]
        report: PathBuf,
        /// Row label in the report.
        #[arg(long, default_value = "NN extraction")]
        method: String,
    },
    /// Parse and validate a rule file.
    RulesCheck {
        #[arg(long)]
        rules: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("invalid {what} `{s}`")))?;
    if v.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{what} needs {n} comma-separated values, got `{s}`"
        )));
    }
    Ok(v)
}

/// Every `.pgm` file in `dir`, in file-name order.
fn load_dir(dir: &Path) -> Result<Vec<Raster>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    paths.iter().map(load_raster).collect()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { spec, out_dir } => {
            let spec = parse_scene(&read_text(&spec)?)?;
            let scene = generate_scene(&spec)?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            save_raster(&scene.raster, out_dir.join("scene.pgm"))?;
            for (kind, mask) in &scene.truth {
                save_mask(mask, out_dir.join(format!("truth_{kind}.pgm")))?;
            }
            Ok(())
        }
        Command::Train {
            class_name,
            positives,
            negatives,
            window,
            out,
            lr,
            epochs,
            seed,
            som,
            target_mse,
            levels,
            offset,
            canny,
            open,
            stretch,
            threshold,
            rules,
        } => {
            let mut p = TrainParams {
                window_size: window,
                ..TrainParams::default()
            };
            if let Some(v) = lr {
                p.train.learning_rate = v;
            }
            if let Some(v) = epochs {
                p.train.max_epochs = v;
            }
            if let Some(v) = seed {
                p.train.seed = v;
            }
            if let Some(v) = target_mse {
                p.train.target_mse = v;
            }
            if let Some(v) = levels {
                p.glcm.levels = v;
            }
            if let Some(o) = offset {
                let v = floats(&o, 2, "offset")?;
                if v.iter().any(|c| c.fract() != 0.0) {
                    return Err(Error::InvalidParameter(format!("offset must be integral, got `{o}`")));
                }
                p.glcm.offset = (v[0] as i32, v[1] as i32);
            }
            if let Some(g) = som {
                let (r, c) = g
                    .split_once('x')
                    .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                    .ok_or_else(|| Error::InvalidParameter(format!("--som must be ROWSxCOLS, got `{g}`")))?;
                p.som = Some(SomSpec {
                    rows: r,
                    cols: c,
                    config: SomConfig {
                        seed: p.train.seed,
                        ..SomConfig::default()
                    },
                });
            }
            if let Some(c) = canny {
                let v = floats(&c, 3, "canny")?;
                p.extract.canny = Some(CannyParams::new(v[0], v[1], v[2])?);
            }
            p.extract.opening = open;
            if let Some(s) = stretch {
                let v = floats(&s, 2, "stretch")?;
                p.extract.stretch = (v[0], v[1]);
            }
            if let Some(t) = threshold {
                p.extract.accept_threshold = t;
            }
            if let Some(path) = rules {
                p.rules = read_text(&path)?;
            }
            let bundle = train_pipeline(&load_dir(&positives)?, &load_dir(&negatives)?, &class_name, &p)?;
            save_bundle(&bundle, &out)
        }
        Command::Extract {
            bundle,
            input,
            rules,
            out_mask,
            bridge_gap,
            threshold,
            overlay: overlay_path,
        } => {
            let mut b = load_bundle(&bundle)?;
            let rules = parse_rules(&read_text(&rules)?)?;
            if let Some(t) = threshold {
                b.params.accept_threshold = t;
            }
            if let Some(gap) = bridge_gap {
                let base = b.params.bridge.unwrap_or_default();
                b.params.bridge = Some(BridgeParams { max_gap: gap, ..base });
            }
            b.params.validate()?;
            let raster = load_raster(&input)?;
            let res = extract_with_rules(&raster, &b, &rules)?;
            save_mask(&res.mask, &out_mask)?;
            if let Some(path) = overlay_path {
                save_raster(&overlay(&raster, &res.mask, b.params.stretch)?, path)?;
            }
            for o in &res.objects {
                let r = &o.record;
                println!(
                    "object {} label={} rule={} area={} bbox={},{},{},{} som_cell={}",
                    r.id,
                    o.label,
                    o.rule_name.as_deref().unwrap_or("-"),
                    r.area,
                    r.bbox.0,
                    r.bbox.1,
                    r.bbox.2,
                    r.bbox.3,
                    o.som_cell
                );
            }
            eprintln!(
                "{} objects kept, {} removed by rules, {} windows rejected",
                res.objects.len(),
                res.rule_rejected_count,
                res.rejected_count
            );
            Ok(())
        }
        Command::Eval {
            pred,
            truth,
            pixel_size,
            report,
            method,
        } => {
            let pred = load_mask(&pred)?;
            let truth = load_mask(&truth)?;
            let cm = confusion_matrix(&pred, &truth)?;
            let acc = accuracy_report(method, &cm);
            let areal = match pixel_size {
                Some(px) => vec![ArealComparison::new(
                    "feature",
                    areal_extent(&truth, px)?,
                    areal_extent(&pred, px)?,
                )?],
                None => Vec::new(),
            };
            let text = format_report(&[acc], &areal);
            fs::write(&report, &text).map_err(|e| Error::io(&report, e))
        }
        Command::RulesCheck { rules } => {
            let rs = parse_rules(&read_text(&rules)?)?;
            eprintln!("{} rules ok", rs.len());
            Ok(())
        }
    }
}
