//! Distractor-aware online-adaptation engine for unsupervised video object
//! segmentation.
//!
//! The crate turns file-based inputs (instance proposals, optical flow,
//! frames) into training directives for an external trainer: a first-frame
//! pseudo ground truth fused from proposals and motion, per-frame
//! positive/negative/hard-negative label maps mined with block-matching
//! tracklets, a serialized adaptation plan with the loss blending weights,
//! and region/contour evaluation metrics. A deterministic synthetic-scene
//! generator provides ground truth for verifying the whole chain.

pub mod adaptation;
pub mod distance;
pub mod error;
pub mod flow;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod pnm;
pub mod proposals;
pub mod pseudo_gt;
pub mod select;
pub mod synth;
pub mod tracklet;

pub use error::{Error, ErrorKind, Result};
pub use mask::{BBox, BinaryMask};
