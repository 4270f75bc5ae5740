//! Rectangular self-organizing map with a Gaussian neighborhood.

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SomGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    codebook: Vec<f64>,
    trained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub radius0: f64,
    pub seed: u64,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig {
            epochs: 50,
            lr0: 0.5,
            radius0: 1.0,
            seed: 0,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("SOM epochs must be at least 1".into()));
        }
        if !(self.lr0 > 0.0 && self.lr0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "SOM lr0 must be in (0, 1], got {}",
                self.lr0
            )));
        }
        if !(self.radius0 > 0.0 && self.radius0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "SOM radius0 must be positive, got {}",
                self.radius0
            )));
        }
        Ok(())
    }

    /// Learning rate and radius for `epoch`: exponential interpolation from
    /// `(lr0, radius0)` at the first epoch to `(0.01 lr0, 0.5)` at the last.
    pub fn schedule(&self, epoch: usize) -> (f64, f64) {
        let s = if self.epochs > 1 {
            epoch as f64 / (self.epochs - 1) as f64
        } else {
            0.0
        };
        let lr = self.lr0 * 0.01f64.powf(s);
        let radius = self.radius0 * (0.5 / self.radius0).powf(s);
        (lr, radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub row: usize,
    pub col: usize,
    pub distance: f64,
}

impl BestMatch {
    pub fn index(&self, cols: usize) -> usize {
        self.row * cols + self.col
    }
}

fn check_samples(samples: &[Vec<f64>]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Empty("SOM training needs at least one sample".into()))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidParameter("SOM samples must have length >= 1".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    Ok(dim)
}

impl SomGrid {
    pub fn from_codebook(rows: usize, cols: usize, dim: usize, codebook: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "SOM grid {rows}x{cols} of dim {dim}"
            )));
        }
        if codebook.len() != rows * cols * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * cols * dim,
                got: codebook.len(),
            });
        }
        if codebook.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite SOM codebook entry".into()));
        }
        Ok(SomGrid {
            rows,
            cols,
            dim,
            codebook,
            trained: false,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codebook(&self) -> &[f64] {
        &self.codebook
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub(crate) fn set_trained(&mut self, trained: bool) {
        self.trained = trained;
    }

    pub fn unit(&self, row: usize, col: usize) -> &[f64] {
        let i = (row * self.cols + col) * self.dim;
        &self.codebook[i..i + self.dim]
    }

    pub fn best_matching_unit(&self, v: &[f64]) -> Result<BestMatch> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.bmu_unchecked(v))
    }

    fn bmu_unchecked(&self, v: &[f64]) -> BestMatch {
        let mut best = (0, f64::INFINITY);
        for (u, w) in self.codebook.chunks_exact(self.dim).enumerate() {
            let d2: f64 = w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (u, d2);
            }
        }
        BestMatch {
            row: best.0 / self.cols,
            col: best.0 % self.cols,
            distance: best.1.sqrt(),
        }
    }

    /// Runs the training schedule from the current codebook and returns the
    /// mean quantization error after each epoch.
    pub fn fit(&mut self, samples: &[Vec<f64>], cfg: &SomConfig) -> Result<Vec<f64>> {
        cfg.validate()?;
        let dim = check_samples(samples)?;
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        let mut rng = Rng::new(cfg.seed ^ 0x50_4D_53);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut errors = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let (lr, radius) = cfg.schedule(epoch);
            let two_r2 = 2.0 * radius * radius;
            rng.shuffle(&mut order);
            for &s in &order {
                let x = &samples[s];
                let bmu = self.bmu_unchecked(x);
                for u in 0..self.rows * self.cols {
                    let (r, c) = (u / self.cols, u % self.cols);
                    let dr = r as f64 - bmu.row as f64;
                    let dc = c as f64 - bmu.col as f64;
                    let h = (-(dr * dr + dc * dc) / two_r2).exp();
                    let step = lr * h;
                    if step == 0.0 {
                        continue;
                    }
                    let w = &mut self.codebook[u * self.dim..(u + 1) * self.dim];
                    for (wi, xi) in w.iter_mut().zip(x) {
                        *wi += step * (xi - *wi);
                    }
                }
            }
            let qe = samples
                .iter()
                .map(|x| self.bmu_unchecked(x).distance)
                .sum::<f64>()
                / samples.len() as f64;
            errors.push(qe);
        }
        self.trained = true;
        Ok(errors)
    }
}

/// Trains a `rows x cols` map. The codebook starts as seeded uniform noise
/// within each dimension's sample range.
pub fn train_som(samples: &[Vec<f64>], rows: usize, cols: usize, cfg: &SomConfig) -> Result<SomGrid> {
    cfg.validate()?;
    let dim = check_samples(samples)?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!("SOM grid {rows}x{cols}")));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for s in samples {
        for (d, &v) in s.iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let mut rng = Rng::new(cfg.seed);
    let mut codebook = Vec::with_capacity(rows * cols * dim);
    for _ in 0..rows * cols {
        for d in 0..dim {
            codebook.push(rng.uniform(lo[d], hi[d]));
        }
    }
    let mut grid = SomGrid::from_codebook(rows, cols, dim, codebook)?;
    grid.fit(samples, cfg)?;
    Ok(grid)
}
