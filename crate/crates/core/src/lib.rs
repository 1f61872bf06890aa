//! Radar-only perception for 4D mmWave point clouds.
//!
//! The pipeline runs four model-driven stages per frame:
//!
//! 1. [`filtering`]: RCS, field-of-view and Doppler plausibility thresholds.
//! 2. [`ego_motion`]: the previous frame is moved into the current sensor
//!    frame using odometry and merged with it (exactly two frames).
//! 3. [`clustering`]: KD-tree radius clustering, Doppler and RCS descriptors,
//!    and the retention test.
//! 4. [`classification`]: size/RCS rules for type, compensated Doppler for
//!    motion state and line-of-sight heading.
//!
//! [`pipeline::Pipeline`] drives the stages over a stream. [`simulator`]
//! produces synthetic scenes with ground truth, [`evaluation`] computes the
//! count-based metrics, and [`io`] holds the JSON Lines formats and config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod classification;
pub mod clustering;
pub mod ego_motion;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod simulator;
pub mod spatial;
pub mod types;

pub use error::{Error, Result};
pub use geometry::{RigidTransform, StampedPose};
pub use pipeline::{FrameResult, Pipeline, PipelineConfig};
pub use types::{PointSource, RadarFrame, RadarPoint};
