//! `.genn` model bundle files.
//!
//! ```text
//! GENN-BUNDLE
//! format_version=1
//! class_name=road
//! window_size=9
//! glcm_levels=8
//! glcm_offset=1,0
//! glcm_symmetric=true
//! layer_sizes=94,16,2
//! som_grid=none                      # or ROWSxCOLS
//! accept_threshold=5.0000000000000000e-1
//! stretch=0.0000000000000000e0,1.0000000000000000e0
//! canny=none                         # or SIGMA,LOW,HIGH
//! opening=none                       # or square side
//! bridge=none                        # or MAX_GAP,DEGREE,CONTEXT_LEN
//! section haralick_mean 13
//! <13 lines, one value each>
//! section haralick_std 13
//! section layer0.weights 1504
//! section layer0.biases 16
//! ...                                # one weights/biases pair per layer
//! section som.codebook N             # only with a SOM
//! section rules BYTES
//! <BYTES bytes of rule text>
//! crc32=1a2b3c4d
//! ```
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly. The final line holds the CRC-32 (IEEE 802.3 polynomial,
//! reflected, as used by zlib and PNG) of every byte before it, in lowercase
//! hex. Lines end with `\n`.

use std::fmt::Write as _;
use std::path::Path;

use super::{BridgeParams, ExtractParams, ModelBundle};
use crate::error::{Error, Result};
use crate::nn::{Layer, MlpNetwork};
use crate::preprocess::CannyParams;
use crate::som::SomGrid;
use crate::texture::GlcmConfig;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "GENN-BUNDLE";

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn section(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "section {name} {}", values.len());
    for &v in values {
        out.push_str(&f(v));
        out.push('\n');
    }
}

pub(crate) fn encode(b: &ModelBundle) -> Vec<u8> {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "format_version={}", b.format_version);
    let _ = writeln!(s, "class_name={}", b.class_name);
    let _ = writeln!(s, "window_size={}", b.window_size);
    let _ = writeln!(s, "glcm_levels={}", b.glcm.levels);
    let _ = writeln!(s, "glcm_offset={},{}", b.glcm.offset.0, b.glcm.offset.1);
    let _ = writeln!(s, "glcm_symmetric={}", b.glcm.symmetric);
    let sizes: Vec<String> = b.network.layer_sizes().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "layer_sizes={}", sizes.join(","));
    match &b.som {
        Some(g) => {
            let _ = writeln!(s, "som_grid={}x{}", g.rows(), g.cols());
        }
        None => s.push_str("som_grid=none\n"),
    }
    let p = &b.params;
    let _ = writeln!(s, "accept_threshold={}", f(p.accept_threshold));
    let _ = writeln!(s, "stretch={},{}", f(p.stretch.0), f(p.stretch.1));
    match &p.canny {
        Some(c) => {
            let _ = writeln!(s, "canny={},{},{}", f(c.sigma), f(c.low_thr), f(c.high_thr));
        }
        None => s.push_str("canny=none\n"),
    }
    match p.opening {
        Some(side) => {
            let _ = writeln!(s, "opening={side}");
        }
        None => s.push_str("opening=none\n"),
    }
    match &p.bridge {
        Some(br) => {
            let _ = writeln!(s, "bridge={},{},{}", f(br.max_gap), br.degree, br.context_len);
        }
        None => s.push_str("bridge=none\n"),
    }
    section(&mut s, "haralick_mean", &b.haralick_mean);
    section(&mut s, "haralick_std", &b.haralick_std);
    for (k, layer) in b.network.layers().iter().enumerate() {
        section(&mut s, &format!("layer{k}.weights"), &layer.weights);
        section(&mut s, &format!("layer{k}.biases"), &layer.biases);
    }
    if let Some(g) = &b.som {
        section(&mut s, "som.codebook", g.codebook());
    }
    let _ = writeln!(s, "section rules {}", b.rules.len());
    s.push_str(&b.rules);
    s.push('\n');
    let crc = crc32fast::hash(s.as_bytes());
    let _ = writeln!(s, "crc32={crc:08x}");
    s.into_bytes()
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.text[self.pos..];
        let end = rest
            .find('\n')
            .ok_or_else(|| Error::Truncated("unterminated line".into()))?;
        self.pos += end + 1;
        Ok(&rest[..end])
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.line()?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| Error::MalformedBundle(format!("expected `{key}=`, found `{line}`")))
    }

    fn section_header(&mut self, name: &str) -> Result<usize> {
        let line = self.line()?;
        let count = line
            .strip_prefix("section ")
            .and_then(|r| r.strip_prefix(name))
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| Error::MalformedBundle(format!("expected section `{name}`, found `{line}`")))?;
        parse_num(count, name)
    }

    fn floats(&mut self, name: &str, expected: usize) -> Result<Vec<f64>> {
        let n = self.section_header(name)?;
        if n != expected {
            return Err(Error::MalformedBundle(format!(
                "section `{name}` holds {n} values, expected {expected}"
            )));
        }
        (0..n).map(|_| parse_float(self.line()?, name)).collect()
    }

    fn bytes(&mut self, name: &str) -> Result<&'a str> {
        let n = self.section_header(name)?;
        let rest = &self.text[self.pos..];
        if rest.len() < n + 1 {
            return Err(Error::Truncated(format!("section `{name}` is cut short")));
        }
        let body = rest
            .get(..n)
            .ok_or_else(|| Error::MalformedBundle(format!("section `{name}` splits a character")))?;
        if rest.as_bytes()[n] != b'\n' {
            return Err(Error::MalformedBundle(format!("section `{name}` has the wrong length")));
        }
        self.pos += n + 1;
        Ok(body)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::MalformedBundle(format!("invalid {what} `{s}`")))
}

fn parse_float(s: &str, what: &str) -> Result<f64> {
    let v: f64 = parse_num(s, what)?;
    if !v.is_finite() {
        return Err(Error::MalformedBundle(format!("non-finite {what}")));
    }
    Ok(v)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|p| parse_num(p, what)).collect()
}

fn optional(s: &str) -> Option<&str> {
    (s != "none").then_some(s)
}

pub(crate) fn decode(bytes: &[u8]) -> Result<ModelBundle> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedBundle("bundle is not valid UTF-8".into()))?;
    let mut r = Reader { text, pos: 0 };
    if r.line().ok() != Some(MAGIC) {
        return Err(Error::MalformedBundle("missing bundle header".into()));
    }
    let format_version: u32 = parse_num(r.field("format_version")?, "format_version")?;
    if format_version > FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: format_version,
            supported: FORMAT_VERSION,
        });
    }
    if format_version == 0 {
        return Err(Error::MalformedBundle("format_version 0".into()));
    }

    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| Error::Truncated("missing checksum".into()))?;
    let stored = text[body_end..]
        .strip_prefix("crc32=")
        .map(|s| s.trim_end_matches('\n'))
        .filter(|s| s.len() == 8)
        .and_then(|s| u32::from_str_radix(s, 16).ok())
        .ok_or_else(|| Error::Truncated("missing checksum".into()))?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    let mut r = Reader {
        text: &text[..body_end],
        pos: r.pos,
    };

    let class_name = r.field("class_name")?.to_string();
    let window_size: usize = parse_num(r.field("window_size")?, "window_size")?;
    let levels: usize = parse_num(r.field("glcm_levels")?, "glcm_levels")?;
    let offset: Vec<i32> = parse_list(r.field("glcm_offset")?, "glcm_offset")?;
    if offset.len() != 2 {
        return Err(Error::MalformedBundle("glcm_offset needs 2 components".into()));
    }
    let symmetric: bool = parse_num(r.field("glcm_symmetric")?, "glcm_symmetric")?;
    let sizes: Vec<usize> = parse_list(r.field("layer_sizes")?, "layer_sizes")?;
    let som_grid = match optional(r.field("som_grid")?) {
        Some(g) => {
            let (rows, cols) = g
                .split_once('x')
                .ok_or_else(|| Error::MalformedBundle(format!("invalid som_grid `{g}`")))?;
            Some((parse_num::<usize>(rows, "som rows")?, parse_num::<usize>(cols, "som cols")?))
        }
        None => None,
    };
    let accept_threshold = parse_float(r.field("accept_threshold")?, "accept_threshold")?;
    let stretch: Vec<f64> = parse_list(r.field("stretch")?, "stretch")?;
    if stretch.len() != 2 {
        return Err(Error::MalformedBundle("stretch needs 2 values".into()));
    }
    let canny = match optional(r.field("canny")?) {
        Some(c) => {
            let v: Vec<f64> = parse_list(c, "canny")?;
            if v.len() != 3 {
                return Err(Error::MalformedBundle("canny needs 3 values".into()));
            }
            Some(CannyParams {
                sigma: v[0],
                low_thr: v[1],
                high_thr: v[2],
            })
        }
        None => None,
    };
    let opening = optional(r.field("opening")?)
        .map(|s| parse_num::<usize>(s, "opening"))
        .transpose()?;
    let bridge = match optional(r.field("bridge")?) {
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::MalformedBundle("bridge needs 3 values".into()));
            }
            Some(BridgeParams {
                max_gap: parse_float(parts[0], "bridge max_gap")?,
                degree: parse_num(parts[1], "bridge degree")?,
                context_len: parse_num(parts[2], "bridge context_len")?,
            })
        }
        None => None,
    };

    let mut haralick_mean = [0.0; 13];
    haralick_mean.copy_from_slice(&r.floats("haralick_mean", 13)?);
    let mut haralick_std = [0.0; 13];
    haralick_std.copy_from_slice(&r.floats("haralick_std", 13)?);

    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::MalformedBundle(format!("invalid layer_sizes {sizes:?}")));
    }
    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for (k, pair) in sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let weights = r.floats(&format!("layer{k}.weights"), fan_in * fan_out)?;
        let biases = r.floats(&format!("layer{k}.biases"), fan_out)?;
        layers.push(Layer {
            fan_in,
            fan_out,
            weights,
            biases,
        });
    }
    let network = MlpNetwork::from_layers(layers)?;
    let dim = sizes[0];
    let som = match som_grid {
        Some((rows, cols)) => {
            let cb = r.floats("som.codebook", rows * cols * dim)?;
            let mut g = SomGrid::from_codebook(rows, cols, dim, cb)?;
            g.set_trained(true);
            Some(g)
        }
        None => None,
    };
    let rules = r.bytes("rules")?.to_string();
    if r.pos != r.text.len() {
        return Err(Error::MalformedBundle("unexpected data after the rules section".into()));
    }

    let bundle = ModelBundle {
        format_version,
        class_name,
        window_size,
        glcm: GlcmConfig {
            levels,
            offset: (offset[0], offset[1]),
            symmetric,
        },
        haralick_mean,
        haralick_std,
        network,
        som,
        rules,
        params: ExtractParams {
            accept_threshold,
            stretch: (stretch[0], stretch[1]),
            canny,
            opening,
            bridge,
        },
    };
    bundle.validate()?;
    Ok(bundle)
}

pub fn save_bundle(b: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    b.validate()?;
    std::fs::write(path, encode(b)).map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
