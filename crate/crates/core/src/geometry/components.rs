use std::collections::VecDeque;

use super::skeleton::skeleton;
use crate::raster::{Mask, Raster};
use crate::rules::AttributeSet;

/// Upper bound for reported compactness. Boundary-pixel perimeters of small
/// digital shapes undercount the continuous perimeter, which pushes
/// `4 pi A / P^2` above 1.
pub const MAX_COMPACTNESS: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];
        const EIGHT: [(isize, isize); 8] = [
            (0, -1),
            (1, 0),
            (0, 1),
            (-1, 0),
            (1, -1),
            (1, 1),
            (-1, 1),
            (-1, -1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRecord {
    /// Zero-based, in scan order of each component's first pixel.
    pub id: usize,
    /// `(x, y)` in scan order.
    pub pixels: Vec<(usize, usize)>,
    /// Inclusive `(x0, y0, x1, y1)`.
    pub bbox: (usize, usize, usize, usize),
    pub area: usize,
    /// Foreground pixels with at least one 4-neighbor in the background
    /// (outside the mask counts as background).
    pub perimeter: usize,
    pub centroid: (f64, f64),
    pub elongation: f64,
    pub width: f64,
    pub compactness: f64,
    /// Zero until filled from a source raster with [`ObjectRecord::fill_mean_intensity`].
    pub mean_intensity: f64,
}

impl ObjectRecord {
    pub fn fill_mean_intensity(&mut self, r: &Raster) {
        let sum: u64 = self.pixels.iter().map(|&(x, y)| r.get(x, y) as u64).sum();
        self.mean_intensity = sum as f64 / self.area as f64;
    }

    pub fn attributes(&self, class_prob: f64, som_cell: i64) -> AttributeSet {
        AttributeSet {
            area: self.area as f64,
            perimeter: self.perimeter as f64,
            width: self.width,
            elongation: self.elongation,
            compactness: self.compactness,
            mean_intensity: self.mean_intensity,
            class_prob,
            som_cell,
        }
    }
}

/// Labels foreground pixels `1..=n` in scan order; background is 0.
pub(crate) fn label_components(m: &Mask, conn: Connectivity) -> (Vec<u32>, usize) {
    let (w, h) = (m.width(), m.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !m.bits()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in conn.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if m.get_or_background(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == 0 {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

pub fn connected_components(m: &Mask, conn: Connectivity) -> Vec<ObjectRecord> {
    let (labels, n) = label_components(m, conn);
    let w = m.width();
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 {
            groups[l as usize - 1].push((i % w, i / w));
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(id, pixels)| describe(id, pixels, m))
        .collect()
}

fn describe(id: usize, pixels: Vec<(usize, usize)>, m: &Mask) -> ObjectRecord {
    let area = pixels.len();
    let n = area as f64;
    let mut bbox = (usize::MAX, usize::MAX, 0, 0);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut perimeter = 0;
    for &(x, y) in &pixels {
        bbox.0 = bbox.0.min(x);
        bbox.1 = bbox.1.min(y);
        bbox.2 = bbox.2.max(x);
        bbox.3 = bbox.3.max(y);
        sx += x as f64;
        sy += y as f64;
        let (xi, yi) = (x as isize, y as isize);
        if Connectivity::Four
            .offsets()
            .iter()
            .any(|&(dx, dy)| !m.get_or_background(xi + dx, yi + dy))
        {
            perimeter += 1;
        }
    }
    let centroid = (sx / n, sy / n);

    // second-order central moments of unit squares: each pixel adds 1/12 to both variances
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &(x, y) in &pixels {
        let (dx, dy) = (x as f64 - centroid.0, y as f64 - centroid.1);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    let (a, b, c) = (a / n + 1.0 / 12.0, b / n, c / n + 1.0 / 12.0);
    let half_diff = (a - c) / 2.0;
    let root = (half_diff * half_diff + b * b).sqrt();
    let mid = (a + c) / 2.0;
    let elongation = ((mid + root) / (mid - root)).sqrt().max(1.0);

    let (bw, bh) = (bbox.2 - bbox.0 + 3, bbox.3 - bbox.1 + 3);
    let mut local = Mask::new(bw, bh);
    for &(x, y) in &pixels {
        local.set(x - bbox.0 + 1, y - bbox.1 + 1, true);
    }
    let skeleton_len = skeleton(&local).count().max(1);
    let width = n / skeleton_len as f64;

    let compactness = (4.0 * std::f64::consts::PI * n / (perimeter * perimeter) as f64).min(MAX_COMPACTNESS);

    ObjectRecord {
        id,
        pixels,
        bbox,
        area,
        perimeter,
        centroid,
        elongation,
        width,
        compactness,
        mean_intensity: 0.0,
    }
}
