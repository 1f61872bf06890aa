//! Line records for frames, poses, detections and ground truth.

use std::io::{Read, Write};

use log::warn;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{read_jsonl_with, write_jsonl};
use crate::classification::{DetectedObject, Heading, MotionState, ObjectType};
use crate::error::{Error, Result};
use crate::geometry::StampedPose;
use crate::pipeline::{FrameResult, StageLatencies};
use crate::types::{RadarFrame, RadarPoint};

/// Quaternion norm error accepted silently on read.
pub const QUAT_NORM_TOLERANCE: f64 = 1e-6;
/// Quaternion norm error repaired by renormalisation (with a warning).
pub const QUAT_NORM_REPAIR_LIMIT: f64 = 1e-3;

/// `{"t": .., "points": [[x, y, z, doppler, rcs, dyn_flag], ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub t: f64,
    pub points: Vec<[f64; 6]>,
}

impl From<&RadarFrame> for FrameRecord {
    fn from(f: &RadarFrame) -> Self {
        Self {
            t: f.timestamp,
            points: f
                .points()
                .iter()
                .map(|p| {
                    [
                        p.x,
                        p.y,
                        p.z,
                        p.doppler,
                        p.rcs,
                        if p.dyn_flag { 1.0 } else { 0.0 },
                    ]
                })
                .collect(),
        }
    }
}

impl FrameRecord {
    pub fn into_frame(self, line: usize) -> Result<RadarFrame> {
        let err = |message: String| Error::Parse { line, message };
        if !self.t.is_finite() {
            return Err(err(format!("frame timestamp {} is not finite", self.t)));
        }
        let mut points = Vec::with_capacity(self.points.len());
        for (k, [x, y, z, doppler, rcs, flag]) in self.points.into_iter().enumerate() {
            let dyn_flag = if flag == 0.0 {
                false
            } else if flag == 1.0 {
                true
            } else {
                return Err(err(format!(
                    "point {k}: dyn_flag must be 0 or 1, got {flag}"
                )));
            };
            let p = RadarPoint::new(x, y, z, doppler, rcs, dyn_flag);
            if !p.is_finite() {
                return Err(err(format!("point {k} has a non-finite field")));
            }
            points.push(p);
        }
        Ok(RadarFrame::new(self.t, points))
    }
}

/// `{"t": .., "p": [x, y, z], "q": [w, x, y, z]}` (world ← sensor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub t: f64,
    pub p: [f64; 3],
    pub q: [f64; 4],
}

impl From<&StampedPose> for PoseRecord {
    fn from(pose: &StampedPose) -> Self {
        let q = pose.rotation.quaternion();
        Self {
            t: pose.timestamp,
            p: [pose.translation.x, pose.translation.y, pose.translation.z],
            q: [q.w, q.i, q.j, q.k],
        }
    }
}

impl PoseRecord {
    pub fn into_pose(self, line: usize) -> Result<StampedPose> {
        let err = |message: String| Error::Parse { line, message };
        if !(self.t.is_finite() && self.p.iter().chain(&self.q).all(|v| v.is_finite())) {
            return Err(err("pose has a non-finite field".into()));
        }
        let [w, i, j, k] = self.q;
        let q = Quaternion::new(w, i, j, k);
        let deviation = (q.norm() - 1.0).abs();
        let rotation = if deviation <= QUAT_NORM_TOLERANCE {
            // Already unit to within tolerance; store it as written so a
            // write/read cycle reproduces the same components.
            UnitQuaternion::new_unchecked(q)
        } else if deviation <= QUAT_NORM_REPAIR_LIMIT {
            warn!("line {line}: quaternion norm off by {deviation:.2e}, renormalising");
            UnitQuaternion::new_normalize(q)
        } else {
            return Err(err(format!("quaternion norm off by {deviation:.3e}")));
        };
        Ok(StampedPose::new(self.t, Vector3::from(self.p), rotation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionEntry {
    #[serde(rename = "type")]
    pub object_type: ObjectType,
    pub motion: MotionState,
    pub heading: Heading,
    pub centroid: [f64; 3],
    /// `[l, w, h]`
    pub extent: [f64; 3],
    pub mean_doppler: f64,
    pub comp_mean_doppler: f64,
    pub modal_rcs: f64,
    pub points: usize,
}

impl Default for DetectionEntry {
    fn default() -> Self {
        Self {
            object_type: ObjectType::Unknown,
            motion: MotionState::Static,
            heading: Heading::None,
            centroid: [0.0; 3],
            extent: [0.0; 3],
            mean_doppler: 0.0,
            comp_mean_doppler: 0.0,
            modal_rcs: 0.0,
            points: 0,
        }
    }
}

impl From<&DetectedObject> for DetectionEntry {
    fn from(o: &DetectedObject) -> Self {
        Self {
            object_type: o.object_type,
            motion: o.motion,
            heading: o.heading,
            centroid: o.bbox.centroid,
            extent: [o.bbox.l, o.bbox.w, o.bbox.h],
            mean_doppler: o.descriptors.mean_doppler,
            comp_mean_doppler: o.descriptors.comp_mean_doppler,
            modal_rcs: o.descriptors.modal_rcs,
            points: o.descriptors.point_count,
        }
    }
}

/// One line of the detection log. `latency_us` is last so that tools can
/// strip it before diffing; everything before it is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub t: f64,
    pub detections: Vec<DetectionEntry>,
    pub degraded: bool,
    pub latency_us: StageLatencies,
}

impl From<&FrameResult> for DetectionRecord {
    fn from(r: &FrameResult) -> Self {
        Self {
            t: r.timestamp,
            detections: r.detections.iter().map(DetectionEntry::from).collect(),
            degraded: r.degraded,
            latency_us: r.stage_latencies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthObject {
    pub id: u64,
    pub class: ObjectType,
    /// Sensor frame at the record's timestamp.
    pub centroid: [f64; 3],
    /// Object velocity in the sensor frame, m/s.
    pub velocity: [f64; 3],
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthRecord {
    pub t: f64,
    pub objects: Vec<TruthObject>,
}

pub fn read_frames(reader: impl Read) -> Result<Vec<RadarFrame>> {
    read_jsonl_with(reader, |line, r: FrameRecord| r.into_frame(line))
}

pub fn write_frames<'a>(
    writer: impl Write,
    frames: impl IntoIterator<Item = &'a RadarFrame>,
) -> Result<()> {
    let records: Vec<FrameRecord> = frames.into_iter().map(FrameRecord::from).collect();
    write_jsonl(writer, &records)
}

/// Reads poses and checks that timestamps strictly increase.
pub fn read_poses(reader: impl Read) -> Result<Vec<StampedPose>> {
    let mut newest = f64::NEG_INFINITY;
    read_jsonl_with(reader, |line, r: PoseRecord| {
        let pose = r.into_pose(line)?;
        if pose.timestamp <= newest {
            return Err(Error::Parse {
                line,
                message: format!("pose timestamp {} does not increase", pose.timestamp),
            });
        }
        newest = pose.timestamp;
        Ok(pose)
    })
}

pub fn write_poses<'a>(
    writer: impl Write,
    poses: impl IntoIterator<Item = &'a StampedPose>,
) -> Result<()> {
    let records: Vec<PoseRecord> = poses.into_iter().map(PoseRecord::from).collect();
    write_jsonl(writer, &records)
}

pub fn read_detections(reader: impl Read) -> Result<Vec<DetectionRecord>> {
    read_jsonl_with(reader, |_, r| Ok(r))
}

pub fn read_truth(reader: impl Read) -> Result<Vec<TruthRecord>> {
    read_jsonl_with(reader, |_, r| Ok(r))
}

pub fn write_truth<'a>(
    writer: impl Write,
    truth: impl IntoIterator<Item = &'a TruthRecord>,
) -> Result<()> {
    write_jsonl(writer, truth)
}
