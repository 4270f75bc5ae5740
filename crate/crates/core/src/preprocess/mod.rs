//! Edge detection and binary morphology applied before classification.

mod canny;
mod morphology;

pub use canny::{canny, gaussian_kernel, smooth, CannyParams};
pub use morphology::{dilate, erode, open, StructuringElement};
