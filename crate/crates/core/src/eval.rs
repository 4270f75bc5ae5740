//! Accuracy assessment: confusion matrices, overall accuracy, Cohen's kappa
//! and areal extent.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::raster::Mask;

/// Rows are reference (truth) classes, columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// `counts` is `k x k`, row-major.
    pub fn new(classes: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        let k = classes.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "a confusion matrix needs at least 2 classes, got {k}"
            )));
        }
        if counts.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: counts.len(),
            });
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::Empty("confusion matrix has no samples".into()));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn from_rows(classes: Vec<String>, rows: &[Vec<u64>]) -> Result<Self> {
        if rows.len() != classes.len() || rows.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::ShapeMismatch(format!(
                "{} classes but the count table is not {0}x{0}",
                classes.len()
            )));
        }
        Self::new(classes, rows.concat())
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    /// Pixels of truth class `truth` predicted as `pred`.
    pub fn count(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k() + pred]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.count(i, i)).sum()
    }

    pub fn row_total(&self, i: usize) -> u64 {
        (0..self.k()).map(|j| self.count(i, j)).sum()
    }

    pub fn col_total(&self, j: usize) -> u64 {
        (0..self.k()).map(|i| self.count(i, j)).sum()
    }

    /// Per-class recall: correct / reference total. `None` for an absent class.
    pub fn producer_accuracy(&self, i: usize) -> Option<f64> {
        let t = self.row_total(i);
        (t > 0).then(|| self.count(i, i) as f64 / t as f64)
    }

    /// Per-class precision: correct / predicted total. `None` when never predicted.
    pub fn user_accuracy(&self, j: usize) -> Option<f64> {
        let t = self.col_total(j);
        (t > 0).then(|| self.count(j, j) as f64 / t as f64)
    }
}

fn check_shape(pw: usize, ph: usize, tw: usize, th: usize) -> Result<()> {
    if (pw, ph) != (tw, th) {
        return Err(Error::ShapeMismatch(format!(
            "prediction is {pw}x{ph} but truth is {tw}x{th}"
        )));
    }
    Ok(())
}

/// Binary matrix with classes `background` (0) and `feature` (1).
pub fn confusion_matrix(pred: &Mask, truth: &Mask) -> Result<ConfusionMatrix> {
    check_shape(pred.width(), pred.height(), truth.width(), truth.height())?;
    let mut counts = vec![0u64; 4];
    for (&p, &t) in pred.bits().iter().zip(truth.bits()) {
        counts[t as usize * 2 + p as usize] += 1;
    }
    ConfusionMatrix::new(vec!["background".into(), "feature".into()], counts)
}

/// Matrix over label grids whose entries index `classes`.
pub fn confusion_matrix_labels(pred: &[usize], truth: &[usize], classes: Vec<String>) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "prediction has {} labels but truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let k = classes.len();
    let mut counts = vec![0u64; k * k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::InvalidParameter(format!(
                "label {} out of range for {k} classes",
                p.max(t)
            )));
        }
        counts[t * k + p] += 1;
    }
    ConfusionMatrix::new(classes, counts)
}

pub fn overall_accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.trace() as f64 / cm.n() as f64
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)`, evaluated as
/// `(n trace - S) / (n^2 - S)` with `S = sum_i row_i col_i`. When chance
/// agreement is total (`S = n^2`) kappa is 1 for perfect agreement.
pub fn kappa(cm: &ConfusionMatrix) -> f64 {
    let n = cm.n() as f64;
    let s: f64 = (0..cm.k())
        .map(|i| cm.row_total(i) as f64 * cm.col_total(i) as f64)
        .sum();
    let denom = n * n - s;
    if denom == 0.0 {
        return if cm.trace() == cm.n() { 1.0 } else { 0.0 };
    }
    (n * cm.trace() as f64 - s) / denom
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub methodology: String,
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub producer_accuracy: Vec<Option<f64>>,
    pub user_accuracy: Vec<Option<f64>>,
}

pub fn accuracy_report(methodology: impl Into<String>, cm: &ConfusionMatrix) -> AccuracyReport {
    AccuracyReport {
        methodology: methodology.into(),
        overall_accuracy: overall_accuracy(cm),
        kappa: kappa(cm),
        producer_accuracy: (0..cm.k()).map(|i| cm.producer_accuracy(i)).collect(),
        user_accuracy: (0..cm.k()).map(|j| cm.user_accuracy(j)).collect(),
    }
}

/// Foreground area in km^2 for square pixels of `pixel_size_m` meters.
pub fn areal_extent(m: &Mask, pixel_size_m: f64) -> Result<f64> {
    if !(pixel_size_m > 0.0 && pixel_size_m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pixel size must be positive, got {pixel_size_m}"
        )));
    }
    Ok(m.count() as f64 * pixel_size_m * pixel_size_m / 1e6)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArealComparison {
    pub feature_name: String,
    pub reference_area: f64,
    pub extracted_area: f64,
    /// `|extracted - reference| / reference`; `None` when the reference is 0.
    pub relative_error: Option<f64>,
}

impl ArealComparison {
    pub fn new(feature_name: impl Into<String>, reference_area: f64, extracted_area: f64) -> Result<Self> {
        if !(reference_area >= 0.0 && extracted_area >= 0.0) {
            return Err(Error::InvalidParameter("areas must be non-negative".into()));
        }
        Ok(ArealComparison {
            feature_name: feature_name.into(),
            reference_area,
            extracted_area,
            relative_error: (reference_area > 0.0)
                .then(|| (extracted_area - reference_area).abs() / reference_area),
        })
    }
}

/// Fixed-width text table. Kappa, overall accuracy (as a percentage) and
/// areas carry 2 decimals; relative errors carry 4. The areal table is only
/// emitted when `areal` is non-empty.
pub fn format_report(reports: &[AccuracyReport], areal: &[ArealComparison]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24}{:>6}  Overall Accuracy (%)", "Methodology", "Kappa");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<24}{:>6.2}  {:.2}",
            r.methodology,
            r.kappa,
            r.overall_accuracy * 100.0
        );
    }
    if !areal.is_empty() {
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<24}{:>22}  {:>18}  {:>14}",
            "Feature", "Reference Area (km2)", "Areal Extent (km2)", "Relative Error"
        );
        for a in areal {
            let rel = a
                .relative_error
                .map_or_else(|| "n/a".to_string(), |e| format!("{e:.4}"));
            let _ = writeln!(
                out,
                "{:<24}{:>22.2}  {:>18.2}  {:>14}",
                a.feature_name, a.reference_area, a.extracted_area, rel
            );
        }
    }
    out
}
