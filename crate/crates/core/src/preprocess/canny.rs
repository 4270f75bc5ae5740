//! Canny edge detector.
//!
//! Stages: Gaussian smoothing (radius `ceil(3 sigma)`, renormalized), Sobel
//! gradients, non-maximum suppression over four direction bins, and
//! hysteresis with 8-connectivity. Smoothing and Sobel replicate edge pixels.
//!
//! The detector commutes exactly with transposition. Smoothing averages the
//! two separable pass orders, the Sobel sums list their terms in mirrored
//! order, and the suppression rule for each bin maps onto its transposed bin.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{Mask, Raster};

/// tan(22.5 deg), the boundary between axis-aligned and diagonal bins.
const TAN_22_5: f64 = 0.414_213_562_373_095_03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    pub low_thr: f64,
    pub high_thr: f64,
}

impl CannyParams {
    pub fn new(sigma: f64, low_thr: f64, high_thr: f64) -> Result<Self> {
        let p = CannyParams {
            sigma,
            low_thr,
            high_thr,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "canny sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.low_thr > 0.0 && self.low_thr < self.high_thr && self.high_thr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds must satisfy 0 < low < high, got ({}, {})",
                self.low_thr, self.high_thr
            )));
        }
        Ok(())
    }
}

pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    fn convolve(&self, k: &[f64], horizontal: bool) -> Plane {
        let r = (k.len() / 2) as isize;
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let mut acc = 0.0;
                for (i, &kv) in k.iter().enumerate() {
                    let d = i as isize - r;
                    acc += kv
                        * if horizontal {
                            self.at(x + d, y)
                        } else {
                            self.at(x, y + d)
                        };
                }
                data.push(acc);
            }
        }
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Gaussian-smoothed copy of `r` as floating-point values, row-major.
pub fn smooth(r: &Raster, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let src = Plane {
        width: r.width(),
        height: r.height(),
        data: r.data().iter().map(|&v| f64::from(v)).collect(),
    };
    let a = src.convolve(&k, true).convolve(&k, false);
    let b = src.convolve(&k, false).convolve(&k, true);
    a.data
        .iter()
        .zip(&b.data)
        .map(|(p, q)| (p + q) * 0.5)
        .collect()
}

pub fn canny(r: &Raster, p: &CannyParams) -> Result<Mask> {
    p.validate()?;
    let (w, h) = (r.width(), r.height());
    if w < 3 || h < 3 {
        return Err(Error::RasterTooSmall(format!(
            "canny needs at least 3x3, got {w}x{h}"
        )));
    }
    let s = Plane {
        width: w,
        height: h,
        data: smooth(r, p.sigma),
    };

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let dx = (s.at(x + 1, y - 1) + 2.0 * s.at(x + 1, y) + s.at(x + 1, y + 1))
                - (s.at(x - 1, y - 1) + 2.0 * s.at(x - 1, y) + s.at(x - 1, y + 1));
            let dy = (s.at(x - 1, y + 1) + 2.0 * s.at(x, y + 1) + s.at(x + 1, y + 1))
                - (s.at(x - 1, y - 1) + 2.0 * s.at(x, y - 1) + s.at(x + 1, y - 1));
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = (dx * dx + dy * dy).sqrt();
        }
    }

    let m_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // candidate = survives suppression and reaches the low threshold
    let mut candidate = vec![false; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let m = mag[i];
            if m < p.low_thr {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            let keep = if ay <= ax * TAN_22_5 {
                m > m_at(x - 1, y) && m >= m_at(x + 1, y)
            } else if ax <= ay * TAN_22_5 {
                m > m_at(x, y - 1) && m >= m_at(x, y + 1)
            } else if gx[i] * gy[i] > 0.0 {
                m > m_at(x - 1, y - 1) && m >= m_at(x + 1, y + 1)
            } else {
                // the anti-diagonal pair swaps under transposition, so ties keep both
                m >= m_at(x + 1, y - 1) && m >= m_at(x - 1, y + 1)
            };
            candidate[i] = keep;
        }
    }

    let mut out = Mask::new(w, h);
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if candidate[i] && mag[i] >= p.high_thr {
            out.set(i % w, i / w, true);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                let j = ny * w + nx;
                if candidate[j] && !out.get(nx, ny) {
                    out.set(nx, ny, true);
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(out)
}
