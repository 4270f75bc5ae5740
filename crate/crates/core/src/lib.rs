pub mod cli;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod nn;
pub mod pipeline;
pub mod preprocess;
pub mod raster;
pub mod rng;
pub mod rules;
pub mod scene;
pub mod som;
pub mod texture;

pub use error::{Error, Result};
