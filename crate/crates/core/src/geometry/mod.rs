//! Object-level analysis of binary masks: connected components with shape
//! attributes, thinning, polynomial curve fitting and gap bridging.

mod bridge;
mod components;
mod curve;
mod skeleton;

pub use bridge::bridge_gaps;
pub use components::{connected_components, Connectivity, ObjectRecord};
pub use curve::{fit_curve, CurveAxis, CurveModel};
pub use skeleton::{endpoints, skeleton};
