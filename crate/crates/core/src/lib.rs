//! Foreground segmentation by background subtraction.
//!
//! The pipeline builds a robust per-pixel background model from a frame
//! sequence, compares each frame against it to get a normalized difference
//! map, and segments that map either by an exact minimum s/t cut on the
//! pixel grid or by the traditional threshold + morphology baseline. A
//! synthetic benchmark generator and evaluation metrics round out the kit.

pub mod bgmodel;
pub mod diffmap;
pub mod error;
pub mod graphcut;
pub mod imgio;
pub mod metrics;
mod maxflow;
pub mod morphology;
pub mod raster;

pub use error::{Error, Result};
pub use raster::{BinaryMask, Image};
