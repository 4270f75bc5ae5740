//! Seeded synthetic scenes with per-kind ground truth.
//!
//! Scene files are line-oriented `key = value` text. Keys before the first
//! `[element]` header describe the canvas; each `[element]` block describes
//! one feature. `#` starts a comment.
//!
//! ```text
//! width = 256
//! height = 128
//! seed = 7
//! background = 110 12          # mean, std
//!
//! [element]
//! kind = road
//! points = 0,64 255,64         # polyline vertices x,y
//! width = 5
//! texture = 200 25
//! breaks = 0.3 0.6             # shadow gap centers as fractions of length
//! break_length = 5
//!
//! [element]
//! kind = lake
//! center = 60,30
//! radii = 25,15
//! texture = 40 4
//!
//! [element]
//! kind = building
//! rect = 150,20,12,12          # x0,y0,width,height
//! texture = 170 20
//! ```
//!
//! Roads need `points` and `width`; other kinds take either `center` and
//! `radii` (an ellipse) or `rect`. Elements are painted in order, so later
//! ones cover earlier ones in both the raster and the truth masks. Shadow
//! gaps are painted 0 and remain part of the road's truth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{Mask, Raster};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Road,
    Lake,
    Park,
    Building,
    Vehicle,
}

impl Kind {
    pub const ALL: [Kind; 5] = [Kind::Road, Kind::Lake, Kind::Park, Kind::Building, Kind::Vehicle];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Road => "road",
            Kind::Lake => "lake",
            Kind::Park => "park",
            Kind::Building => "building",
            Kind::Vehicle => "vehicle",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kind `{s}`"))
    }
}

/// Gaussian gray-level noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Texture {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polyline {
        points: Vec<(f64, f64)>,
        width: f64,
        /// Gap centers as fractions of the polyline length.
        breaks: Vec<f64>,
        break_length: f64,
    },
    Ellipse {
        center: (f64, f64),
        radii: (f64, f64),
    },
    Rect {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: Kind,
    pub shape: Shape,
    pub texture: Texture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub background: Texture,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub raster: Raster,
    /// Footprint of each kind, shadow gaps included. Every kind has an entry.
    pub truth: BTreeMap<Kind, Mask>,
    /// Footprint of each kind as rendered, shadow gaps excluded.
    pub visible: BTreeMap<Kind, Mask>,
}

fn fmt_pt(p: (f64, f64)) -> String {
    format!("{},{}", p.0, p.1)
}

impl fmt::Display for SceneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width = {}", self.width)?;
        writeln!(f, "height = {}", self.height)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "background = {} {}", self.background.mean, self.background.std)?;
        for e in &self.elements {
            writeln!(f, "\n[element]\nkind = {}", e.kind)?;
            match &e.shape {
                Shape::Polyline {
                    points,
                    width,
                    breaks,
                    break_length,
                } => {
                    let pts: Vec<String> = points.iter().map(|&p| fmt_pt(p)).collect();
                    writeln!(f, "points = {}", pts.join(" "))?;
                    writeln!(f, "width = {width}")?;
                    if !breaks.is_empty() {
                        let b: Vec<String> = breaks.iter().map(|v| v.to_string()).collect();
                        writeln!(f, "breaks = {}", b.join(" "))?;
                        writeln!(f, "break_length = {break_length}")?;
                    }
                }
                Shape::Ellipse { center, radii } => {
                    writeln!(f, "center = {}", fmt_pt(*center))?;
                    writeln!(f, "radii = {}", fmt_pt(*radii))?;
                }
                Shape::Rect { x0, y0, width, height } => {
                    writeln!(f, "rect = {x0},{y0},{width},{height}")?;
                }
            }
            writeln!(f, "texture = {} {}", e.texture.mean, e.texture.std)?;
        }
        Ok(())
    }
}

fn num<T: FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::SceneSpec {
        line,
        message: format!("invalid {what} `{}`", s.trim()),
    })
}

fn pair(s: &str, line: usize, what: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').ok_or_else(|| Error::SceneSpec {
        line,
        message: format!("{what} must be `a,b`, got `{s}`"),
    })?;
    Ok((num(a, line, what)?, num(b, line, what)?))
}

fn texture(s: &str, line: usize) -> Result<Texture> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::SceneSpec {
            line,
            message: format!("texture must be `MEAN STD`, got `{s}`"),
        });
    }
    let t = Texture {
        mean: num(parts[0], line, "texture mean")?,
        std: num(parts[1], line, "texture std")?,
    };
    if !(t.mean.is_finite() && t.std >= 0.0 && t.std.is_finite()) {
        return Err(Error::SceneSpec {
            line,
            message: "texture std must be non-negative and finite".into(),
        });
    }
    Ok(t)
}

#[derive(Default)]
struct Block {
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

impl Block {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.keys.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| Error::SceneSpec {
            line: self.line,
            message: format!("missing `{key}`"),
        })
    }

    fn finish(self) -> Result<()> {
        match self.keys.into_iter().next() {
            Some((k, (line, _))) => Err(Error::SceneSpec {
                line,
                message: format!("unexpected key `{k}`"),
            }),
            None => Ok(()),
        }
    }
}

fn element(mut b: Block) -> Result<Element> {
    let (kl, kind) = b.require("kind")?;
    let kind: Kind = kind.parse().map_err(|message| Error::SceneSpec { line: kl, message })?;
    let (tl, tex) = b.require("texture")?;
    let texture = texture(&tex, tl)?;
    let shape = if kind == Kind::Road {
        let (pl, pts) = b.require("points")?;
        let points = pts
            .split_whitespace()
            .map(|p| pair(p, pl, "point"))
            .collect::<Result<Vec<_>>>()?;
        if points.len() < 2 {
            return Err(Error::SceneSpec {
                line: pl,
                message: "a road needs at least 2 points".into(),
            });
        }
        let (wl, w) = b.require("width")?;
        let width: f64 = num(&w, wl, "width")?;
        let breaks = match b.take("breaks") {
            Some((l, v)) => v
                .split_whitespace()
                .map(|s| num::<f64>(s, l, "break"))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let break_length = match b.take("break_length") {
            Some((l, v)) => num(&v, l, "break_length")?,
            None => 0.0,
        };
        if !(width > 0.0) || breaks.iter().any(|f| !(0.0..=1.0).contains(f)) || !(break_length >= 0.0) {
            return Err(Error::SceneSpec {
                line: b.line,
                message: "road width must be positive, breaks in [0, 1], break_length >= 0".into(),
            });
        }
        Shape::Polyline {
            points,
            width,
            breaks,
            break_length,
        }
    } else if let Some((rl, r)) = b.take("rect") {
        let v = r
            .split(',')
            .map(|s| num::<usize>(s, rl, "rect"))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 4 || v[2] == 0 || v[3] == 0 {
            return Err(Error::SceneSpec {
                line: rl,
                message: "rect must be `x0,y0,width,height` with positive size".into(),
            });
        }
        Shape::Rect {
            x0: v[0],
            y0: v[1],
            width: v[2],
            height: v[3],
        }
    } else {
        let (cl, c) = b.require("center")?;
        let (rl, r) = b.require("radii")?;
        let radii = pair(&r, rl, "radii")?;
        if !(radii.0 > 0.0 && radii.1 > 0.0) {
            return Err(Error::SceneSpec {
                line: rl,
                message: "radii must be positive".into(),
            });
        }
        Shape::Ellipse {
            center: pair(&c, cl, "center")?,
            radii,
        }
    };
    b.finish()?;
    Ok(Element { kind, shape, texture })
}

pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let mut header = Block {
        line: 1,
        ..Block::default()
    };
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content == "[element]" {
            blocks.push(Block {
                line,
                ..Block::default()
            });
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::SceneSpec {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let target = blocks.last_mut().unwrap_or(&mut header);
        let key = k.trim().to_string();
        if target.keys.contains_key(&key) {
            return Err(Error::SceneSpec {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        target.keys.insert(key, (line, v.trim().to_string()));
    }
    let (wl, w) = header.require("width")?;
    let (hl, h) = header.require("height")?;
    let width = num(&w, wl, "width")?;
    let height = num(&h, hl, "height")?;
    let seed = match header.take("seed") {
        Some((l, v)) => num(&v, l, "seed")?,
        None => 0,
    };
    let background = match header.take("background") {
        Some((l, v)) => texture(&v, l)?,
        None => Texture { mean: 128.0, std: 0.0 },
    };
    header.finish()?;
    let spec = SceneSpec {
        width,
        height,
        seed,
        background,
        elements: blocks.into_iter().map(element).collect::<Result<_>>()?,
    };
    spec.validate()?;
    Ok(spec)
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "canvas must be non-empty, got {}x{}",
                self.width, self.height
            )));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let inside = |x: f64, y: f64| x >= 0.0 && y >= 0.0 && x <= w - 1.0 && y <= h - 1.0;
        for (index, e) in self.elements.iter().enumerate() {
            let ok = match &e.shape {
                Shape::Polyline { points, .. } => points.iter().all(|&(x, y)| inside(x, y)),
                Shape::Ellipse { center, radii } => {
                    inside(center.0 - radii.0, center.1 - radii.1) && inside(center.0 + radii.0, center.1 + radii.1)
                }
                Shape::Rect { x0, y0, width, height } => x0 + width <= self.width && y0 + height <= self.height,
            };
            if !ok {
                return Err(Error::ElementOutOfCanvas {
                    index,
                    kind: e.kind.to_string(),
                    width: self.width,
                    height: self.height,
                });
            }
        }
        Ok(())
    }
}

/// Distance from `p` to the polyline and the arc length of the closest point.
fn polyline_projection(points: &[(f64, f64)], p: (f64, f64)) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut start = 0.0;
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (vx, vy) = (b.0 - a.0, b.1 - a.1);
        let len = (vx * vx + vy * vy).sqrt();
        let t = if len > 0.0 {
            (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / (len * len)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (qx, qy) = (a.0 + t * vx, a.1 + t * vy);
        let d = ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt();
        if d < best.0 {
            best = (d, start + t * len);
        }
        start += len;
    }
    best
}

fn polyline_length(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|s| ((s[1].0 - s[0].0).powi(2) + (s[1].1 - s[0].1).powi(2)).sqrt())
        .sum()
}

fn sample(rng: &mut Rng, t: Texture) -> u8 {
    (t.mean + t.std * rng.normal()).round().clamp(0.0, 255.0) as u8
}

/// Renders `spec`. Noise is drawn from one seeded stream: the background in
/// scan order, then each element's footprint in scan order.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = Rng::new(spec.seed);
    let mut data: Vec<u8> = (0..w * h).map(|_| sample(&mut rng, spec.background)).collect();
    let mut owner: Vec<Option<Kind>> = vec![None; w * h];
    let mut shadow = vec![false; w * h];

    for e in &spec.elements {
        let (x0, y0, x1, y1) = match &e.shape {
            Shape::Polyline { points, width, .. } => {
                let r = width / 2.0;
                let xs = points.iter().map(|p| p.0);
                let ys = points.iter().map(|p| p.1);
                (
                    (xs.clone().fold(f64::INFINITY, f64::min) - r).floor().max(0.0) as usize,
                    (ys.clone().fold(f64::INFINITY, f64::min) - r).floor().max(0.0) as usize,
                    ((xs.fold(f64::NEG_INFINITY, f64::max) + r).ceil() as usize).min(w - 1),
                    ((ys.fold(f64::NEG_INFINITY, f64::max) + r).ceil() as usize).min(h - 1),
                )
            }
            Shape::Ellipse { center, radii } => (
                (center.0 - radii.0).floor() as usize,
                (center.1 - radii.1).floor() as usize,
                (center.0 + radii.0).ceil() as usize,
                (center.1 + radii.1).ceil() as usize,
            ),
            Shape::Rect { x0, y0, width, height } => (*x0, *y0, x0 + width - 1, y0 + height - 1),
        };
        let total = match &e.shape {
            Shape::Polyline { points, .. } => polyline_length(points),
            _ => 0.0,
        };
        for y in y0..=y1.min(h - 1) {
            for x in x0..=x1.min(w - 1) {
                let (xf, yf) = (x as f64, y as f64);
                let (inside, in_gap) = match &e.shape {
                    Shape::Polyline {
                        points,
                        width,
                        breaks,
                        break_length,
                    } => {
                        let (d, s) = polyline_projection(points, (xf, yf));
                        let gap = breaks.iter().any(|&f| {
                            let c = f * total;
                            s >= c - break_length / 2.0 && s < c + break_length / 2.0
                        });
                        (d <= width / 2.0, gap)
                    }
                    Shape::Ellipse { center, radii } => {
                        let u = (xf - center.0) / radii.0;
                        let v = (yf - center.1) / radii.1;
                        (u * u + v * v <= 1.0, false)
                    }
                    Shape::Rect { .. } => (true, false),
                };
                if !inside {
                    continue;
                }
                let i = y * w + x;
                owner[i] = Some(e.kind);
                shadow[i] = in_gap;
                data[i] = if in_gap { 0 } else { sample(&mut rng, e.texture) };
            }
        }
    }

    let mut truth = BTreeMap::new();
    let mut visible = BTreeMap::new();
    for k in Kind::ALL {
        truth.insert(k, Mask::from_fn(w, h, |x, y| owner[y * w + x] == Some(k)));
        visible.insert(
            k,
            Mask::from_fn(w, h, |x, y| owner[y * w + x] == Some(k) && !shadow[y * w + x]),
        );
    }
    Ok(Scene {
        raster: Raster::new(w, h, data)?,
        truth,
        visible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{connected_components, Connectivity};

    const ROAD: &str = "width = 120\nheight = 40\nseed = 3\nbackground = 100 10\n\n\
        [element]\nkind = road\npoints = 0,20 119,20\nwidth = 5\ntexture = 200 20\n\
        breaks = 0.33 0.66\nbreak_length = 5\n";

    #[test]
    fn empty_scene() {
        let s = generate_scene(&parse_scene("width = 30\nheight = 20\nseed = 1\nbackground = 90 8").unwrap()).unwrap();
        assert!(s.truth.values().all(|m| m.is_empty()));
        assert_eq!(s.truth.len(), 5);
        assert!(s.raster.data().iter().any(|&v| v != 90));
    }

    #[test]
    fn deterministic() {
        let spec = parse_scene(ROAD).unwrap();
        assert_eq!(generate_scene(&spec).unwrap(), generate_scene(&spec).unwrap());
    }

    #[test]
    fn road_with_two_gaps() {
        let s = generate_scene(&parse_scene(ROAD).unwrap()).unwrap();
        let truth = &s.truth[&Kind::Road];
        let vis = &s.visible[&Kind::Road];
        assert_eq!(connected_components(truth, Connectivity::Eight).len(), 1);
        assert_eq!(connected_components(vis, Connectivity::Eight).len(), 3);
        assert_eq!(truth.count() - vis.count(), 2 * 5 * 5);
        for (x, y) in truth.foreground() {
            if !vis.get(x, y) {
                assert_eq!(s.raster.get(x, y), 0);
            }
        }
    }

    #[test]
    fn spec_text_round_trips() {
        let spec = parse_scene(ROAD).unwrap();
        assert_eq!(parse_scene(&spec.to_string()).unwrap(), spec);
        let more = "width = 50\nheight = 50\n[element]\nkind = lake\ncenter = 20,20\nradii = 5,3\ntexture = 30 2\n\
            [element]\nkind = vehicle\nrect = 1,2,3,4\ntexture = 250 1\n";
        let spec = parse_scene(more).unwrap();
        assert_eq!(parse_scene(&spec.to_string()).unwrap(), spec);
    }

    #[test]
    fn errors() {
        let out = "width = 20\nheight = 20\n[element]\nkind = building\nrect = 15,15,10,2\ntexture = 1 1\n";
        assert!(matches!(parse_scene(out), Err(Error::ElementOutOfCanvas { index: 0, .. })));
        let bad = "width = 20\nheight = 20\n[element]\nkind = tree\n";
        assert!(matches!(parse_scene(bad), Err(Error::SceneSpec { line: 4, .. })));
        assert!(matches!(parse_scene("width = 5\nheight = 5\ncolour = red"), Err(Error::SceneSpec { line: 3, .. })));
        assert!(matches!(parse_scene("height = 5"), Err(Error::SceneSpec { .. })));
    }
}
