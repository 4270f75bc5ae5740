//! Raster and mask types, PGM I/O, contrast stretching and window flattening.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Single-band 8-bit image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!("{width}x{height} raster")));
        }
        if data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Raster::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with replicate-edge border handling.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn transpose(&self) -> Raster {
        Raster::from_fn(self.height, self.width, |x, y| self.get(y, x)).expect("same pixel count")
    }

    /// Copies the `w`x`h` block whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::Dimensions(format!(
                "crop {w}x{h} at ({x0}, {y0}) outside {}x{} raster",
                self.width, self.height
            )));
        }
        Raster::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }
}

/// Binary foreground/background grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Mask {
            width,
            height,
            bits,
        }
    }

    /// Pixels with value > 127 are foreground.
    pub fn from_raster(r: &Raster) -> Self {
        Mask {
            width: r.width(),
            height: r.height(),
            bits: r.data().iter().map(|&v| v > 127).collect(),
        }
    }

    /// Foreground to 255, background to 0.
    pub fn to_raster(&self) -> Raster {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        Raster::new(self.width.max(1), self.height.max(1), data)
            .expect("mask dimensions are nonzero when converted")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds reads as background.
    #[inline]
    pub fn get_or_background(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn union_with(&mut self, other: &Mask) {
        assert!(self.same_shape(other), "union of masks with different shapes");
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &Mask) -> f64 {
        let inter = self.intersection_count(other);
        let union = self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a || b)
            .count();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn transpose(&self) -> Mask {
        Mask::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Square window with an odd side length, addressed by its top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
}

impl Window {
    pub fn new(x0: usize, y0: usize, size: usize) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window size must be odd, got {size}"
            )));
        }
        Ok(Window { x0, y0, size })
    }

    /// Window of side `size` centered on `(cx, cy)`.
    pub fn centered(cx: usize, cy: usize, size: usize) -> Result<Self> {
        let half = size / 2;
        if cx < half || cy < half {
            return Err(Error::InvalidParameter(format!(
                "window of size {size} centered at ({cx}, {cy}) starts before the origin"
            )));
        }
        Window::new(cx - half, cy - half, size)
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 + self.size <= width && self.y0 + self.size <= height
    }

    pub(crate) fn check(&self, r: &Raster) -> Result<()> {
        if self.fits(r.width(), r.height()) {
            Ok(())
        } else {
            Err(Error::WindowOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                size: self.size,
                width: r.width(),
                height: r.height(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// PGM

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedPgm(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::MalformedPgm(format!(
                    "invalid {what} `{}`",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes a P2 (ASCII) or P5 (binary) PGM with maxval <= 255. Values are
/// kept as stored; no rescaling to 255 is applied.
pub fn decode_pgm(bytes: &[u8]) -> Result<Raster> {
    let mut rd = HeaderReader { bytes, pos: 0 };
    let magic = rd
        .token()
        .ok_or_else(|| Error::MalformedPgm("empty file".into()))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::MalformedPgm(format!(
                "unknown magic `{}`",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval = rd.number("maxval")?;
    if maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if maxval == 0 || width == 0 || height == 0 {
        return Err(Error::MalformedPgm(format!(
            "degenerate header {width}x{height} maxval {maxval}"
        )));
    }
    let n = width * height;
    let data = if binary {
        // exactly one whitespace byte separates the header from the payload
        let start = rd.pos + 1;
        if start + n > bytes.len() {
            return Err(Error::MalformedPgm(format!(
                "payload has {} bytes, expected {n}",
                bytes.len().saturating_sub(start)
            )));
        }
        bytes[start..start + n].to_vec()
    } else {
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let v = rd.number(&format!("pixel {i}"))?;
            if v > maxval {
                return Err(Error::MalformedPgm(format!(
                    "pixel {i} value {v} exceeds maxval {maxval}"
                )));
            }
            data.push(v as u8);
        }
        data
    };
    if let Some(&bad) = data.iter().find(|&&v| u32::from(v) > maxval) {
        return Err(Error::MalformedPgm(format!(
            "value {bad} exceeds maxval {maxval}"
        )));
    }
    Raster::new(width, height, data)
}

/// Canonical binary P5 encoding with maxval 255.
pub fn encode_pgm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.width(), r.height()).into_bytes();
    out.extend_from_slice(r.data());
    out
}

pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn save_raster(r: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(r)).map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    load_raster(path).map(|r| Mask::from_raster(&r))
}

pub fn save_mask(m: &Mask, path: impl AsRef<Path>) -> Result<()> {
    save_raster(&m.to_raster(), path)
}

// ---------------------------------------------------------------------------
// Contrast

/// Nearest-rank quantile of the sorted pixel multiset (`p` clamped to [0, 1]).
fn nearest_rank(sorted: &[u8], p: f64) -> u8 {
    let n = sorted.len();
    let rank = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Linear stretch mapping the `low_pct` quantile to 0 and the `high_pct`
/// quantile to 255, clamping outside. When the two quantiles coincide (for
/// example a constant raster) the input is returned unchanged.
pub fn histogram_stretch(r: &Raster, low_pct: f64, high_pct: f64) -> Result<Raster> {
    if !(0.0..0.5).contains(&low_pct) || !(high_pct > 0.5 && high_pct <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "stretch percentiles must satisfy 0 <= low < 0.5 < high <= 1, got ({low_pct}, {high_pct})"
        )));
    }
    let mut sorted = r.data().to_vec();
    sorted.sort_unstable();
    let lo = nearest_rank(&sorted, low_pct);
    let hi = nearest_rank(&sorted, high_pct);
    if hi <= lo {
        return Ok(r.clone());
    }
    let span = f64::from(hi - lo);
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = if v <= lo as usize {
            0
        } else if v >= hi as usize {
            255
        } else {
            ((v as f64 - f64::from(lo)) * 255.0 / span).round() as u8
        };
    }
    let data = r.data().iter().map(|&v| lut[v as usize]).collect();
    Raster::new(r.width(), r.height(), data)
}

/// Row-major window pixels scaled to [0, 1].
pub fn flatten_window(r: &Raster, w: Window) -> Result<Vec<f64>> {
    w.check(r)?;
    let mut out = Vec::with_capacity(w.size * w.size);
    flatten_into(r, w, &mut out);
    Ok(out)
}

pub(crate) fn flatten_into(r: &Raster, w: Window, out: &mut Vec<f64>) {
    for y in w.y0..w.y0 + w.size {
        let row = &r.data()[y * r.width() + w.x0..y * r.width() + w.x0 + w.size];
        out.extend(row.iter().map(|&v| f64::from(v) / 255.0));
    }
}
