//! Vessel correspondence optimization (VCO).
//!
//! Registers a known vessel centerline structure from one fluoroscopic frame
//! onto the next by solving a pairwise MRF over sampled vessel points, then
//! reconnects and extends the centerline with fast-marching minimal paths.
//!
//! The crate is `no_std` and only needs `alloc`. All IO (image files, graph
//! files, the command-line driver) lives in the `vco` companion crate.
//!
//! Pipeline, in the order a frame pair flows through it:
//!
//! 1. [`align::build_target_shape`] and [`align::chamfer_match`]: global translation.
//! 2. [`candidates`]: keypoint matches, branch displacements, per-point candidates.
//! 3. [`mrf`]: correspondence MRF, minimized with TRW-S.
//! 4. [`postprocess`]: minimal-path reconnection and new-branch growth.
#![no_std]

extern crate alloc;

pub mod align;
pub mod candidates;
pub mod config;
pub mod descriptor;
pub mod edt;
mod error;
pub mod fmm;
pub mod geom;
pub mod graph;
pub mod image;
pub mod metrics;
pub mod morphology;
pub mod mrf;
pub mod pipeline;
pub mod postprocess;
pub mod synth;
pub mod vesselness;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use geom::Pixel;
pub use graph::{Branch, VesselGraph, VesselPoint};
pub use image::{GrayImage, Mask, ScalarMap};
