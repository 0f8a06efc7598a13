//! Primary object segmentation for frame sequences.
//!
//! The pipeline has three stages:
//!
//! 1. [`hierarchy`] slices the sequence into odd/even sub-videos, recursively,
//!    until a fixed depth; sibling leaves are paired.
//! 2. [`coseg`] co-segments every frame pair across sibling leaves through a
//!    pluggable backend and averages the per-pair maps into one initial map
//!    per frame.
//! 3. [`flowrefine`] decomposes frames into superpixels, links temporally
//!    adjacent frames with neighborhood reversible flows and runs one
//!    propagation pass before projecting back to pixels and thresholding.
//!
//! [`metrics`] and [`datatools`] provide the evaluation protocol and dataset
//! statistics; [`pipeline`] and [`commands`] wire everything for the CLI.

pub mod commands;
pub mod config;
pub mod coseg;
pub mod datatools;
pub mod error;
pub mod flowrefine;
pub mod hierarchy;
pub mod imagery;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, ErrorClass, Result};
pub use imagery::{BinaryMask, Frame, FrameSequence, ProbabilityMap};
