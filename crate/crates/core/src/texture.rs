//! Gray-level co-occurrence matrices and the thirteen Haralick statistics.
//!
//! Gray levels are 0-based, so sums over `i + j` start at 0. Entropies are in
//! bits with `0 log 0 = 0`. Correlation is 0 when either marginal variance is
//! 0, and the first information measure of correlation is 0 when both
//! marginal entropies are 0.

use crate::error::{Error, Result};
use crate::raster::{Raster, Window};

/// Default number of quantized gray levels.
pub const DEFAULT_LEVELS: usize = 8;

/// Marginal variances below this are treated as zero.
const VARIANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmConfig {
    pub levels: usize,
    pub offset: (i32, i32),
    pub symmetric: bool,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        GlcmConfig {
            levels: DEFAULT_LEVELS,
            offset: (1, 0),
            symmetric: true,
        }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.levels) {
            return Err(Error::InvalidParameter(format!(
                "GLCM levels must be in 2..=256, got {}",
                self.levels
            )));
        }
        if self.offset == (0, 0) {
            return Err(Error::InvalidParameter("GLCM offset must be nonzero".into()));
        }
        Ok(())
    }
}

/// Normalized co-occurrence probabilities `p(i, j)`, row-major `levels x levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    levels: usize,
    cells: Vec<f64>,
    offset: (i32, i32),
    symmetric: bool,
}

#[inline]
pub fn quantize(v: u8, levels: usize) -> u8 {
    (usize::from(v) * levels / 256) as u8
}

impl GlcmMatrix {
    /// Builds from probabilities directly. Cells must be non-negative and sum to 1.
    pub fn from_probabilities(levels: usize, cells: Vec<f64>) -> Result<Self> {
        if levels < 2 || cells.len() != levels * levels {
            return Err(Error::InvalidParameter(format!(
                "{} cells for {levels} levels",
                cells.len()
            )));
        }
        if cells.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter("negative or non-finite GLCM cell".into()));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("GLCM cells sum to {total}")));
        }
        let symmetric = (0..levels)
            .all(|i| (0..levels).all(|j| cells[i * levels + j] == cells[j * levels + i]));
        Ok(GlcmMatrix {
            levels,
            cells,
            offset: (1, 0),
            symmetric,
        })
    }

    /// Co-occurrences over a grid that already holds gray-level indices `< levels`.
    pub fn from_levels(grid: &[u8], width: usize, height: usize, cfg: GlcmConfig) -> Result<Self> {
        cfg.validate()?;
        if grid.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{} levels for a {width}x{height} region",
                grid.len()
            )));
        }
        if let Some(&bad) = grid.iter().find(|&&g| usize::from(g) >= cfg.levels) {
            return Err(Error::InvalidParameter(format!(
                "gray level {bad} outside 0..{}",
                cfg.levels
            )));
        }
        let n = cfg.levels;
        let mut counts = vec![0u32; n * n];
        let total = count_pairs(grid, width, height, cfg, &mut counts);
        if total == 0 {
            return Err(Error::NoPixelPairs {
                dx: cfg.offset.0,
                dy: cfg.offset.1,
                width,
                height,
            });
        }
        let inv = 1.0 / f64::from(total);
        Ok(GlcmMatrix {
            levels: n,
            cells: counts.iter().map(|&c| f64::from(c) * inv).collect(),
            offset: cfg.offset,
            symmetric: cfg.symmetric,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.levels + j]
    }

    pub fn offset(&self) -> (i32, i32) {
        self.offset
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

fn count_pairs(grid: &[u8], width: usize, height: usize, cfg: GlcmConfig, counts: &mut [u32]) -> u32 {
    let n = cfg.levels;
    let (dx, dy) = (cfg.offset.0 as isize, cfg.offset.1 as isize);
    let mut total = 0;
    for y in 0..height as isize {
        let ny = y + dy;
        if ny < 0 || ny >= height as isize {
            continue;
        }
        for x in 0..width as isize {
            let nx = x + dx;
            if nx < 0 || nx >= width as isize {
                continue;
            }
            let a = usize::from(grid[y as usize * width + x as usize]);
            let b = usize::from(grid[ny as usize * width + nx as usize]);
            counts[a * n + b] += 1;
            total += 1;
            if cfg.symmetric {
                counts[b * n + a] += 1;
                total += 1;
            }
        }
    }
    total
}

/// GLCM of the window, with gray values quantized by `floor(v * levels / 256)`.
pub fn compute_glcm(r: &Raster, w: Window, cfg: GlcmConfig) -> Result<GlcmMatrix> {
    cfg.validate()?;
    w.check(r)?;
    let mut grid = Vec::with_capacity(w.size * w.size);
    for y in w.y0..w.y0 + w.size {
        for x in w.x0..w.x0 + w.size {
            grid.push(quantize(r.get(x, y), cfg.levels));
        }
    }
    GlcmMatrix::from_levels(&grid, w.size, w.size, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HaralickVector {
    pub energy: f64,
    pub correlation: f64,
    pub inertia: f64,
    pub entropy: f64,
    pub inverse_difference_moment: f64,
    pub sum_average: f64,
    pub sum_variance: f64,
    pub sum_entropy: f64,
    pub difference_average: f64,
    pub difference_variance: f64,
    pub difference_entropy: f64,
    pub imc1: f64,
    pub imc2: f64,
}

impl HaralickVector {
    pub const LEN: usize = 13;

    pub const NAMES: [&'static str; 13] = [
        "energy",
        "correlation",
        "inertia",
        "entropy",
        "inverse_difference_moment",
        "sum_average",
        "sum_variance",
        "sum_entropy",
        "difference_average",
        "difference_variance",
        "difference_entropy",
        "imc1",
        "imc2",
    ];

    pub fn to_array(&self) -> [f64; 13] {
        [
            self.energy,
            self.correlation,
            self.inertia,
            self.entropy,
            self.inverse_difference_moment,
            self.sum_average,
            self.sum_variance,
            self.sum_entropy,
            self.difference_average,
            self.difference_variance,
            self.difference_entropy,
            self.imc1,
            self.imc2,
        ]
    }
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

fn mean_and_variance(dist: &[f64]) -> (f64, f64) {
    let mean: f64 = dist.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
    let var = dist
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64 - mean).powi(2) * p)
        .sum();
    (mean, var)
}

fn entropy_of(dist: &[f64]) -> f64 {
    -dist.iter().map(|&p| plogp(p)).sum::<f64>()
}

pub fn haralick_features(g: &GlcmMatrix) -> HaralickVector {
    let n = g.levels;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut p_sum = vec![0.0; 2 * n - 1];
    let mut p_diff = vec![0.0; n];

    let mut energy = 0.0;
    let mut inertia = 0.0;
    let mut hxy = 0.0;
    let mut idm = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.p(i, j);
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            let d = i.abs_diff(j);
            p_diff[d] += p;
            let d2 = (d * d) as f64;
            energy += p * p;
            inertia += d2 * p;
            idm += p / (1.0 + d2);
            hxy -= plogp(p);
        }
    }

    let (mu_x, var_x) = mean_and_variance(&px);
    let (mu_y, var_y) = mean_and_variance(&py);
    let correlation = if var_x < VARIANCE_FLOOR || var_y < VARIANCE_FLOOR {
        0.0
    } else {
        let mut cov = 0.0;
        for i in 0..n {
            for j in 0..n {
                cov += (i as f64 - mu_x) * (j as f64 - mu_y) * g.p(i, j);
            }
        }
        cov / (var_x.sqrt() * var_y.sqrt())
    };

    let (sum_average, sum_variance) = mean_and_variance(&p_sum);
    let (difference_average, difference_variance) = mean_and_variance(&p_diff);

    let hx = entropy_of(&px);
    let hy = entropy_of(&py);
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let q = px[i] * py[j];
            if q > 0.0 {
                let lq = q.log2();
                hxy1 -= g.p(i, j) * lq;
                hxy2 -= q * lq;
            }
        }
    }
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 { (hxy - hxy1) / hmax } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy).max(0.0)).exp()).max(0.0).sqrt();

    HaralickVector {
        energy,
        correlation,
        inertia,
        entropy: hxy,
        inverse_difference_moment: idm,
        sum_average,
        sum_variance,
        sum_entropy: entropy_of(&p_sum),
        difference_average,
        difference_variance,
        difference_entropy: entropy_of(&p_diff),
        imc1,
        imc2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn sym2() -> GlcmConfig {
        GlcmConfig {
            levels: 2,
            offset: (1, 0),
            symmetric: true,
        }
    }

    #[test]
    fn two_row_window() {
        let g = GlcmMatrix::from_levels(&[0, 0, 1, 1], 2, 2, sym2()).unwrap();
        assert_eq!(g.cells(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn same_via_raster_quantization() {
        let r = Raster::new(3, 3, vec![0, 0, 0, 255, 255, 255, 0, 0, 0]).unwrap();
        let g = compute_glcm(&r, Window::new(0, 0, 3).unwrap(), sym2()).unwrap();
        assert!((g.p(0, 0) - 2.0 / 3.0).abs() < TOL);
        assert!((g.p(1, 1) - 1.0 / 3.0).abs() < TOL);
        assert_eq!(g.p(0, 1), 0.0);
    }

    #[test]
    fn constant_window() {
        let r = Raster::filled(5, 5, 17).unwrap();
        for offset in [(1, 0), (0, 1), (1, 1), (-2, 1)] {
            let cfg = GlcmConfig { offset, ..sym2() };
            let g = compute_glcm(&r, Window::new(0, 0, 5).unwrap(), cfg).unwrap();
            assert_eq!(g.cells(), &[1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn checkerboard_is_all_mixed() {
        let grid: Vec<u8> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as u8).collect();
        let g = GlcmMatrix::from_levels(&grid, 4, 4, sym2()).unwrap();
        assert_eq!(g.cells(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn errors() {
        let cfg = GlcmConfig {
            offset: (3, 0),
            ..sym2()
        };
        assert!(matches!(
            GlcmMatrix::from_levels(&[0, 1, 0, 1], 2, 2, cfg),
            Err(Error::NoPixelPairs { .. })
        ));
        assert!(GlcmConfig { levels: 1, ..sym2() }.validate().is_err());
        assert!(GlcmConfig { offset: (0, 0), ..sym2() }.validate().is_err());
        assert!(GlcmMatrix::from_levels(&[0, 2, 0, 1], 2, 2, sym2()).is_err());
    }

    #[test]
    fn asymmetric_counts_one_direction() {
        let cfg = GlcmConfig {
            symmetric: false,
            ..sym2()
        };
        let g = GlcmMatrix::from_levels(&[0, 1, 0, 1], 2, 2, cfg).unwrap();
        assert_eq!(g.cells(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(!g.is_symmetric());
    }

    #[test]
    fn single_outcome_features() {
        let g = GlcmMatrix::from_probabilities(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let h = haralick_features(&g);
        assert_eq!(h.energy, 1.0);
        assert_eq!(h.inverse_difference_moment, 1.0);
        for v in [
            h.entropy,
            h.inertia,
            h.sum_average,
            h.sum_variance,
            h.sum_entropy,
            h.difference_average,
            h.difference_variance,
            h.difference_entropy,
            h.correlation,
            h.imc1,
            h.imc2,
        ] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn checkerboard_features() {
        let g = GlcmMatrix::from_probabilities(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let h = haralick_features(&g);
        assert!((h.energy - 0.5).abs() < TOL);
        assert!((h.inertia - 1.0).abs() < TOL);
        assert!((h.entropy - 1.0).abs() < TOL);
        assert!((h.inverse_difference_moment - 0.5).abs() < TOL);
        assert!((h.correlation + 1.0).abs() < TOL);
    }

    #[test]
    fn uniform_features() {
        let g = GlcmMatrix::from_probabilities(2, vec![0.25; 4]).unwrap();
        let h = haralick_features(&g);
        assert!((h.energy - 0.25).abs() < TOL);
        assert!((h.entropy - 2.0).abs() < TOL);
        assert!(h.correlation.abs() < TOL);
        // independence: both information measures vanish
        assert!(h.imc1.abs() < TOL);
        assert!(h.imc2.abs() < TOL);
    }
}
