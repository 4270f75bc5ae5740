use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PGM: {0}")]
    MalformedPgm(String),

    #[error("unsupported maxval {0} (only maxval <= 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("window {size}x{size} at ({x0}, {y0}) does not fit inside a {width}x{height} raster")]
    WindowOutOfBounds {
        x0: usize,
        y0: usize,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("raster too small: {0}")]
    RasterTooSmall(String),

    #[error("no co-occurring pixel pair for offset ({dx}, {dy}) in a {width}x{height} region")]
    NoPixelPairs {
        dx: i32,
        dy: i32,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("rule syntax error at line {line}, column {column}: {message}")]
    RuleSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown attribute `{name}` at line {line}, column {column}")]
    UnknownAttribute {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),

    #[error("invalid attribute set: {0}")]
    InvalidAttributes(String),

    #[error("underdetermined fit: {points} points for a degree-{degree} polynomial")]
    Underdetermined { points: usize, degree: usize },

    #[error("singular least-squares system")]
    Singular,

    #[error("Haralick feature `{0}` is constant over the training pool")]
    ConstantFeature(&'static str),

    #[error("bundle format version {found} is newer than supported version {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("bundle checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("truncated bundle: {0}")]
    Truncated(String),

    #[error("malformed bundle: {0}")]
    MalformedBundle(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("scene spec error at line {line}: {message}")]
    SceneSpec { line: usize, message: String },

    #[error("element {index} ({kind}) does not fit inside the {width}x{height} canvas")]
    ElementOutOfCanvas {
        index: usize,
        kind: String,
        width: usize,
        height: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
