//! End-to-end feature extraction: per-class training on exemplar patches,
//! window scanning, object analysis, rule interpretation and gap bridging.

mod bundle;

use rayon::prelude::*;

pub use bundle::{load_bundle, save_bundle, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::geometry::{bridge_gaps, connected_components, Connectivity, ObjectRecord};
use crate::nn::{classify_output, init_network, train_backprop, MlpNetwork, TrainConfig, TrainingSet};
use crate::preprocess::{canny, open, CannyParams, StructuringElement};
use crate::raster::{flatten_into, histogram_stretch, Mask, Raster, Window};
use crate::rules::{parse_rules, RuleSet, DEFAULT_RULES, REJECT_LABEL};
use crate::som::{train_som, SomConfig, SomGrid};
use crate::texture::{compute_glcm, haralick_features, GlcmConfig, HaralickVector};

pub const HIDDEN_UNITS: usize = 16;
/// Label of objects no rule matched.
pub const NN_ONLY: &str = "nn-only";
/// Output index of the feature class; index 1 is "not the feature".
pub const FEATURE_CLASS: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeParams {
    pub max_gap: f64,
    pub degree: usize,
    pub context_len: usize,
}

impl Default for BridgeParams {
    fn default() -> Self {
        BridgeParams {
            max_gap: 12.0,
            degree: 2,
            context_len: 15,
        }
    }
}

/// Extraction-time settings stored in the bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractParams {
    /// Minimum feature-class output for a window to be accepted.
    pub accept_threshold: f64,
    /// Histogram stretch percentiles `(low, high)`; `(0, 1)` is a min-max stretch.
    pub stretch: (f64, f64),
    /// When set, Canny edge pixels are cleared from the accepted mask.
    pub canny: Option<CannyParams>,
    /// When set, the accepted mask is opened with a square of this side.
    pub opening: Option<usize>,
    pub bridge: Option<BridgeParams>,
}

impl Default for ExtractParams {
    fn default() -> Self {
        ExtractParams {
            accept_threshold: 0.5,
            stretch: (0.0, 1.0),
            canny: None,
            opening: None,
            bridge: None,
        }
    }
}

impl ExtractParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accept_threshold) {
            return Err(Error::InvalidParameter(format!(
                "accept threshold must be in [0, 1], got {}",
                self.accept_threshold
            )));
        }
        let (lo, hi) = self.stretch;
        if !((0.0..0.5).contains(&lo) && hi > 0.5 && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "stretch percentiles must satisfy 0 <= low < 0.5 < high <= 1, got ({lo}, {hi})"
            )));
        }
        if let Some(c) = &self.canny {
            c.validate()?;
        }
        if let Some(side) = self.opening {
            StructuringElement::square(side)?;
        }
        if let Some(b) = &self.bridge {
            if !(b.max_gap >= 1.0 && b.max_gap.is_finite()) {
                return Err(Error::InvalidParameter(format!("bridge max_gap must be >= 1, got {}", b.max_gap)));
            }
            if !(1..=3).contains(&b.degree) {
                return Err(Error::InvalidParameter(format!("bridge degree must be 1..=3, got {}", b.degree)));
            }
            if b.context_len < 2 {
                return Err(Error::InvalidParameter("bridge context_len must be >= 2".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomSpec {
    pub rows: usize,
    pub cols: usize,
    pub config: SomConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub window_size: usize,
    pub glcm: GlcmConfig,
    pub train: TrainConfig,
    pub som: Option<SomSpec>,
    pub extract: ExtractParams,
    /// Rule text packaged into the bundle.
    pub rules: String,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            window_size: 9,
            glcm: GlcmConfig::default(),
            train: TrainConfig {
                learning_rate: 0.1,
                max_epochs: 300,
                target_mse: 0.005,
                seed: 0,
                shuffle: true,
            },
            som: None,
            extract: ExtractParams::default(),
            rules: DEFAULT_RULES.to_string(),
        }
    }
}

/// Trained per-class model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub format_version: u32,
    pub class_name: String,
    pub window_size: usize,
    pub glcm: GlcmConfig,
    pub haralick_mean: [f64; 13],
    pub haralick_std: [f64; 13],
    pub network: MlpNetwork,
    pub som: Option<SomGrid>,
    pub rules: String,
    pub params: ExtractParams,
}

impl ModelBundle {
    pub fn feature_len(&self) -> usize {
        self.window_size * self.window_size + HaralickVector::LEN
    }

    pub fn validate(&self) -> Result<()> {
        validate_class_name(&self.class_name)?;
        validate_window(self.window_size)?;
        self.glcm.validate()?;
        self.params.validate()?;
        if let Some(k) = self.haralick_std.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::ConstantFeature(HaralickVector::NAMES[k]));
        }
        let sizes = self.network.layer_sizes();
        if sizes.first() != Some(&self.feature_len()) || sizes.last() != Some(&2) {
            return Err(Error::InvalidParameter(format!(
                "network shape {sizes:?} does not fit window {}",
                self.window_size
            )));
        }
        if let Some(s) = &self.som {
            if s.dim() != self.feature_len() {
                return Err(Error::DimensionMismatch {
                    expected: self.feature_len(),
                    got: s.dim(),
                });
            }
        }
        Ok(())
    }
}

fn validate_class_name(name: &str) -> Result<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(Error::InvalidParameter(format!(
            "class name must be non-empty ASCII letters, digits, `_` or `-`, got `{name}`"
        )));
    }
    Ok(())
}

fn validate_window(size: usize) -> Result<()> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window size must be odd and >= 3, got {size}"
        )));
    }
    Ok(())
}

/// Network input for one window: the `size^2` gray fractions followed by the
/// 13 standardized Haralick features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub pixel_part: Vec<f64>,
    pub haralick_part: [f64; 13],
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.pixel_part.len() + self.haralick_part.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.pixel_part.clone();
        v.extend_from_slice(&self.haralick_part);
        v
    }
}

fn raw_haralick(r: &Raster, w: Window, glcm: GlcmConfig) -> Result<[f64; 13]> {
    Ok(haralick_features(&compute_glcm(r, w, glcm)?).to_array())
}

/// Writes the network input for `w` into `out`.
fn features_into(r: &Raster, w: Window, b: &ModelBundle, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    flatten_into(r, w, out);
    let h = raw_haralick(r, w, b.glcm)?;
    for k in 0..13 {
        out.push((h[k] - b.haralick_mean[k]) / b.haralick_std[k]);
    }
    Ok(())
}

pub fn window_features(r: &Raster, w: Window, b: &ModelBundle) -> Result<FeatureVector> {
    w.check(r)?;
    if w.size != b.window_size {
        return Err(Error::InvalidParameter(format!(
            "window size {} differs from the bundle's {}",
            w.size, b.window_size
        )));
    }
    let mut v = Vec::with_capacity(b.feature_len());
    features_into(r, w, b, &mut v)?;
    let mut haralick_part = [0.0; 13];
    haralick_part.copy_from_slice(&v[w.size * w.size..]);
    v.truncate(w.size * w.size);
    Ok(FeatureVector {
        pixel_part: v,
        haralick_part,
    })
}

/// Top-left corners of the training windows of one exemplar.
fn sample_windows(r: &Raster, size: usize) -> Vec<Window> {
    let stride = (size / 2).max(1);
    let mut out = Vec::new();
    let mut y = 0;
    while y + size <= r.height() {
        let mut x = 0;
        while x + size <= r.width() {
            out.push(Window { x0: x, y0: y, size });
            x += stride;
        }
        y += stride;
    }
    out
}

/// Trains a bundle for `class_name` from exemplar patches. Windows are taken
/// on a dense grid with stride `window_size / 2`.
pub fn train_pipeline(
    positives: &[Raster],
    negatives: &[Raster],
    class_name: &str,
    params: &TrainParams,
) -> Result<ModelBundle> {
    validate_class_name(class_name)?;
    validate_window(params.window_size)?;
    params.glcm.validate()?;
    params.train.validate()?;
    params.extract.validate()?;
    parse_rules(&params.rules)?;
    if positives.is_empty() {
        return Err(Error::Empty("no positive exemplars".into()));
    }
    if negatives.is_empty() {
        return Err(Error::Empty("no negative exemplars".into()));
    }
    let size = params.window_size;
    for (kind, set) in [("positive", positives), ("negative", negatives)] {
        if let Some((i, r)) = set
            .iter()
            .enumerate()
            .find(|(_, r)| r.width() < size || r.height() < size)
        {
            return Err(Error::RasterTooSmall(format!(
                "{kind} exemplar {i} is {}x{}, smaller than the {size}x{size} window",
                r.width(),
                r.height()
            )));
        }
    }

    // (pixel part, raw haralick, label)
    let mut samples: Vec<(Vec<f64>, [f64; 13], usize)> = Vec::new();
    for (label, set) in [(FEATURE_CLASS, positives), (1 - FEATURE_CLASS, negatives)] {
        for r in set {
            for w in sample_windows(r, size) {
                let mut px = Vec::with_capacity(size * size);
                flatten_into(r, w, &mut px);
                samples.push((px, raw_haralick(r, w, params.glcm)?, label));
            }
        }
    }

    let n = samples.len() as f64;
    let mut mean = [0.0; 13];
    let mut std = [0.0; 13];
    for k in 0..13 {
        mean[k] = samples.iter().map(|s| s.1[k]).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s.1[k] - mean[k]).powi(2)).sum::<f64>() / n;
        std[k] = var.sqrt();
        if !(std[k] > 1e-12 * mean[k].abs().max(1.0)) {
            return Err(Error::ConstantFeature(HaralickVector::NAMES[k]));
        }
    }

    let dim = size * size + 13;
    let mut inputs = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for (px, h, label) in samples {
        let mut v = px;
        v.extend((0..13).map(|k| (h[k] - mean[k]) / std[k]));
        inputs.push(v);
        labels.push(label);
    }
    let som_inputs: Vec<Vec<f64>> = inputs
        .iter()
        .zip(&labels)
        .filter(|(_, &l)| l == FEATURE_CLASS)
        .map(|(v, _)| v.clone())
        .collect();

    let data = TrainingSet::one_hot(inputs, &labels, 2)?;
    let net = init_network(&[dim, HIDDEN_UNITS, 2], params.train.seed)?;
    let (network, _) = train_backprop(net, &data, &params.train)?;
    let som = match &params.som {
        Some(spec) => Some(train_som(&som_inputs, spec.rows, spec.cols, &spec.config)?),
        None => None,
    };

    Ok(ModelBundle {
        format_version: FORMAT_VERSION,
        class_name: class_name.to_string(),
        window_size: size,
        glcm: params.glcm,
        haralick_mean: mean,
        haralick_std: std,
        network,
        som,
        rules: params.rules.clone(),
        params: params.extract,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedObject {
    pub record: ObjectRecord,
    /// Rule label, or [`NN_ONLY`] when no rule matched.
    pub label: String,
    pub rule_name: Option<String>,
    /// Most frequent SOM unit over the object's pixels; -1 without a SOM.
    pub som_cell: i64,
    /// Mean feature-class output over the object's pixels.
    pub class_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub mask: Mask,
    pub objects: Vec<ExtractedObject>,
    /// Windows the network did not accept.
    pub rejected_count: usize,
    /// Objects removed by a `reject` rule.
    pub rule_rejected_count: usize,
    /// Per-pixel feature-class output, row-major.
    pub feature_prob: Vec<f64>,
}

struct WindowResult {
    prob: f64,
    accepted: bool,
    som_cell: i64,
}

/// Runs `b` over `r` with the rules packaged in the bundle.
pub fn extract(r: &Raster, b: &ModelBundle) -> Result<ExtractionResult> {
    let rules = parse_rules(&b.rules)?;
    extract_with_rules(r, b, &rules)
}

/// Every pixel at least `window_size / 2` from the border is labeled by the
/// window centered on it; pixels nearer the border copy the nearest such
/// center. Windows are evaluated in parallel; the result does not depend on
/// the thread count.
pub fn extract_with_rules(r: &Raster, b: &ModelBundle, rules: &RuleSet) -> Result<ExtractionResult> {
    if b.format_version > FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: b.format_version,
            supported: FORMAT_VERSION,
        });
    }
    b.validate()?;
    let size = b.window_size;
    let (w, h) = (r.width(), r.height());
    if w < size || h < size {
        return Err(Error::RasterTooSmall(format!(
            "raster is {w}x{h}, smaller than the {size}x{size} window"
        )));
    }
    let p = &b.params;
    let stretched = histogram_stretch(r, p.stretch.0, p.stretch.1)?;
    let half = size / 2;
    let (nx, ny) = (w - 2 * half, h - 2 * half);

    let rows: Vec<Vec<WindowResult>> = (0..ny)
        .into_par_iter()
        .map(|y0| -> Result<Vec<WindowResult>> {
            let mut buf = Vec::with_capacity(b.feature_len());
            (0..nx)
                .map(|x0| {
                    features_into(&stretched, Window { x0, y0, size }, b, &mut buf)?;
                    let out = b.network.forward(&buf)?;
                    let c = classify_output(&out);
                    let accepted = c.class_index == FEATURE_CLASS && c.confidence >= p.accept_threshold;
                    let som_cell = match (&b.som, accepted) {
                        (Some(s), true) => s.best_matching_unit(&buf)?.index(s.cols()) as i64,
                        _ => -1,
                    };
                    Ok(WindowResult {
                        prob: out[FEATURE_CLASS],
                        accepted,
                        som_cell,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rejected_count = rows.iter().flatten().filter(|c| !c.accepted).count();
    let at = |x: usize, y: usize| {
        let cx = x.clamp(half, w - 1 - half) - half;
        let cy = y.clamp(half, h - 1 - half) - half;
        &rows[cy][cx]
    };
    let mut mask = Mask::from_fn(w, h, |x, y| at(x, y).accepted);
    let mut feature_prob = Vec::with_capacity(w * h);
    let mut som_map = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let c = at(x, y);
            feature_prob.push(c.prob);
            som_map.push(c.som_cell);
        }
    }

    if let Some(cp) = &p.canny {
        let edges = canny(&stretched, cp)?;
        mask = Mask::from_fn(w, h, |x, y| mask.get(x, y) && !edges.get(x, y));
    }
    if let Some(side) = p.opening {
        mask = open(&mask, &StructuringElement::square(side)?);
    }

    let mut objects = Vec::new();
    let mut rule_rejected_count = 0;
    for mut record in connected_components(&mask, Connectivity::Eight) {
        record.fill_mean_intensity(r);
        let class_prob =
            record.pixels.iter().map(|&(x, y)| feature_prob[y * w + x]).sum::<f64>() / record.area as f64;
        let som_cell = match &b.som {
            Some(s) => {
                let mut votes = vec![0usize; s.rows() * s.cols()];
                for &(x, y) in &record.pixels {
                    if let Ok(u) = usize::try_from(som_map[y * w + x]) {
                        votes[u] += 1;
                    }
                }
                // most votes, ties to the lowest unit index
                let best = votes
                    .iter()
                    .enumerate()
                    .fold((0, 0), |acc, (u, &v)| if v > acc.1 { (u, v) } else { acc });
                if best.1 == 0 {
                    -1
                } else {
                    best.0 as i64
                }
            }
            None => -1,
        };
        let attrs = record.attributes(class_prob, som_cell);
        match rules.evaluate(&attrs) {
            Some(d) if d.label == REJECT_LABEL => {
                for &(x, y) in &record.pixels {
                    mask.set(x, y, false);
                }
                rule_rejected_count += 1;
            }
            decision => {
                let (label, rule_name) = match decision {
                    Some(d) => (d.label.to_string(), Some(d.rule_name.to_string())),
                    None => (NN_ONLY.to_string(), None),
                };
                objects.push(ExtractedObject {
                    record,
                    label,
                    rule_name,
                    som_cell,
                    class_prob,
                });
            }
        }
    }

    if let Some(bp) = &p.bridge {
        mask = bridge_gaps(&mask, bp.max_gap, bp.degree, bp.context_len);
    }

    Ok(ExtractionResult {
        mask,
        objects,
        rejected_count,
        rule_rejected_count,
        feature_prob,
    })
}

/// Marks mask foreground at gray 255 over the stretched input.
pub fn overlay(r: &Raster, m: &Mask, stretch: (f64, f64)) -> Result<Raster> {
    if (r.width(), r.height()) != (m.width(), m.height()) {
        return Err(Error::ShapeMismatch(format!(
            "raster is {}x{} but mask is {}x{}",
            r.width(),
            r.height(),
            m.width(),
            m.height()
        )));
    }
    let mut out = histogram_stretch(r, stretch.0, stretch.1)?;
    for (x, y) in m.foreground() {
        out.set(x, y, 255);
    }
    Ok(out)
}
