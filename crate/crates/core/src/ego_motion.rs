//! Stage 2: pose interpolation, frame-to-frame transforms, two-frame
//! accumulation and platform velocity for Doppler compensation.

use std::collections::VecDeque;
use std::sync::{Arc, RwLock};

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{apply_transform, los_unit_vector, RigidTransform, StampedPose};
use crate::types::{PointSource, RadarFrame, RadarPoint};

pub const DEFAULT_POSE_CAPACITY: usize = 256;
pub const DEFAULT_EXTRAPOLATION_LIMIT: f64 = 0.050;
pub const DEFAULT_VELOCITY_WINDOW: f64 = 0.200;

/// Platform velocity in the current sensor frame, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoState {
    pub velocity: Vector3<f64>,
}

impl EgoState {
    pub fn new(velocity: Vector3<f64>) -> Self {
        Self { velocity }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros())
    }
}

/// Bounded, time-ordered history of odometry poses.
///
/// Pushing past `capacity` evicts the oldest pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseBuffer {
    poses: VecDeque<StampedPose>,
    capacity: usize,
    /// How far past the newest pose a query may extrapolate, seconds.
    pub extrapolation_limit: f64,
    /// Width of the window centred on the query time used for velocity, seconds.
    pub velocity_window: f64,
}

impl Default for PoseBuffer {
    fn default() -> Self {
        Self::new(DEFAULT_POSE_CAPACITY)
    }
}

impl PoseBuffer {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            poses: VecDeque::with_capacity(capacity),
            capacity,
            extrapolation_limit: DEFAULT_EXTRAPOLATION_LIMIT,
            velocity_window: DEFAULT_VELOCITY_WINDOW,
        }
    }

    pub fn with_extrapolation_limit(mut self, seconds: f64) -> Self {
        self.extrapolation_limit = seconds;
        self
    }

    pub fn with_velocity_window(mut self, seconds: f64) -> Self {
        self.velocity_window = seconds;
        self
    }

    /// Appends a pose; timestamps must strictly increase.
    pub fn push(&mut self, pose: StampedPose) -> Result<()> {
        if !pose.timestamp.is_finite() {
            return Err(Error::Config(format!(
                "pose timestamp {} is not finite",
                pose.timestamp
            )));
        }
        if let Some(newest) = self.newest() {
            if pose.timestamp <= newest.timestamp {
                return Err(Error::PoseOrder {
                    t: pose.timestamp,
                    newest: newest.timestamp,
                });
            }
        }
        if self.poses.len() == self.capacity {
            self.poses.pop_front();
        }
        self.poses.push_back(pose);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn oldest(&self) -> Option<&StampedPose> {
        self.poses.front()
    }

    pub fn newest(&self) -> Option<&StampedPose> {
        self.poses.back()
    }

    pub fn iter(&self) -> impl Iterator<Item = &StampedPose> {
        self.poses.iter()
    }
}

/// A pose buffer shared between one odometry writer and any number of
/// readers. Readers work on snapshots, so a reader never observes a
/// half-applied update.
#[derive(Debug, Clone, Default)]
pub struct SharedPoseBuffer {
    inner: Arc<RwLock<PoseBuffer>>,
}

impl SharedPoseBuffer {
    pub fn new(buffer: PoseBuffer) -> Self {
        Self {
            inner: Arc::new(RwLock::new(buffer)),
        }
    }

    pub fn push(&self, pose: StampedPose) -> Result<()> {
        self.inner
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .push(pose)
    }

    pub fn snapshot(&self) -> PoseBuffer {
        self.inner.read().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

fn gap(t: f64, reason: impl Into<String>) -> Error {
    Error::PoseGap {
        t,
        reason: reason.into(),
    }
}

/// Pose at `s` along the path from `a` (s = 0) to `b` (s = 1); `s` > 1
/// extrapolates at constant velocity. Rotation follows the shortest arc.
fn blend(a: &StampedPose, b: &StampedPose, s: f64, t: f64) -> StampedPose {
    let translation = a.translation + (b.translation - a.translation) * s;
    let delta = a.rotation.inverse() * b.rotation;
    let mut rotation: UnitQuaternion<f64> = a.rotation * delta.powf(s);
    rotation.renormalize();
    StampedPose::new(t, translation, rotation)
}

/// Pose at radar time `t`.
///
/// Translation is interpolated linearly and rotation by slerp between the
/// bracketing poses. A query that hits a stored timestamp returns that pose
/// unchanged. Queries after the newest pose extrapolate up to
/// `extrapolation_limit`.
pub fn interpolate_pose(buffer: &PoseBuffer, t: f64) -> Result<StampedPose> {
    let (Some(oldest), Some(newest)) = (buffer.oldest(), buffer.newest()) else {
        return Err(gap(t, "pose buffer is empty"));
    };
    if !t.is_finite() {
        return Err(gap(t, "query time is not finite"));
    }
    if t < oldest.timestamp {
        return Err(gap(
            t,
            format!("before oldest pose at {:.6} s", oldest.timestamp),
        ));
    }
    let poses = &buffer.poses;
    if t >= newest.timestamp {
        if t == newest.timestamp {
            return Ok(*newest);
        }
        if t - newest.timestamp > buffer.extrapolation_limit {
            return Err(gap(
                t,
                format!(
                    "{:.1} ms past newest pose, limit {:.1} ms",
                    (t - newest.timestamp) * 1e3,
                    buffer.extrapolation_limit * 1e3
                ),
            ));
        }
        if poses.len() < 2 {
            return Ok(StampedPose {
                timestamp: t,
                ..*newest
            });
        }
        let a = &poses[poses.len() - 2];
        let s = (t - a.timestamp) / (newest.timestamp - a.timestamp);
        return Ok(blend(a, newest, s, t));
    }
    // First index whose timestamp is > t; t < newest so it exists and is ≥ 1.
    let hi = poses.partition_point(|p| p.timestamp <= t);
    let a = &poses[hi - 1];
    if a.timestamp == t {
        return Ok(*a);
    }
    let b = &poses[hi];
    let s = (t - a.timestamp) / (b.timestamp - a.timestamp);
    Ok(blend(a, b, s, t))
}

/// Transform taking coordinates in the previous sensor frame to the current
/// one: `inverse(world ← curr) ∘ (world ← prev)`.
pub fn relative_transform(pose_prev: &StampedPose, pose_curr: &StampedPose) -> RigidTransform {
    pose_curr
        .transform()
        .inverse()
        .compose(&pose_prev.transform())
}

/// Merges the current frame with the previous frame moved into the current
/// sensor frame.
///
/// Only points tagged [`PointSource::Current`] in either input take part, so
/// the result never spans more than two radar epochs. Previous-frame points
/// keep their Doppler values as measured.
pub fn accumulate(prev: &RadarFrame, curr: &RadarFrame, t: &RigidTransform) -> Result<RadarFrame> {
    if !(prev.timestamp < curr.timestamp) {
        return Err(Error::FrameOrder {
            prev: prev.timestamp,
            curr: curr.timestamp,
        });
    }
    let mut out = RadarFrame::empty(curr.timestamp);
    for (p, _) in curr
        .iter_tagged()
        .filter(|(_, s)| *s == PointSource::Current)
    {
        out.push(*p, PointSource::Current);
    }
    for (p, _) in prev
        .iter_tagged()
        .filter(|(_, s)| *s == PointSource::Current)
    {
        out.push(apply_transform(t, p), PointSource::AccumulatedPrevious);
    }
    Ok(out)
}

/// Doppler of a previous-epoch point restated for the current epoch.
///
/// The platform's own contribution at the old epoch, `ego_prev · r̂_old`, is
/// swapped for its contribution along the point's new line of sight,
/// `ego_curr · r̂_new`. For a world-static reflector this is exactly the
/// Doppler the sensor would measure now. Degenerate positions keep their
/// measured value.
pub fn carry_doppler(
    original: &RadarPoint,
    moved: &RadarPoint,
    ego_prev: &EgoState,
    ego_curr: &EgoState,
) -> f64 {
    match (los_unit_vector(original), los_unit_vector(moved)) {
        (Ok(r_old), Ok(r_new)) => {
            original.doppler - ego_prev.velocity.dot(&r_old) + ego_curr.velocity.dot(&r_new)
        }
        _ => original.doppler,
    }
}

/// [`accumulate`] followed by [`carry_doppler`] on every previous-frame point.
pub fn accumulate_compensated(
    prev: &RadarFrame,
    curr: &RadarFrame,
    t: &RigidTransform,
    ego_prev: &EgoState,
    ego_curr: &EgoState,
) -> Result<RadarFrame> {
    let mut out = accumulate(prev, curr, t)?;
    let originals: Vec<&RadarPoint> = prev
        .iter_tagged()
        .filter(|(_, s)| *s == PointSource::Current)
        .map(|(p, _)| p)
        .collect();
    let first_prev = out.len() - originals.len();
    for (moved, original) in out.points_mut()[first_prev..].iter_mut().zip(originals) {
        moved.doppler = carry_doppler(original, moved, ego_prev, ego_curr);
    }
    Ok(out)
}

/// Platform velocity at `t`, expressed in the sensor frame at `t`.
///
/// Uses a finite difference between the first and last stored poses inside
/// the velocity window centred on `t` (central when poses exist on both
/// sides, one-sided otherwise), then rotates the world-frame result by the
/// inverse of the interpolated orientation at `t`.
pub fn ego_velocity(buffer: &PoseBuffer, t: f64) -> Result<EgoState> {
    let half = buffer.velocity_window / 2.0;
    let mut in_window = buffer.iter().filter(|p| (p.timestamp - t).abs() <= half);
    let first = in_window.next();
    let last = in_window.last();
    let (Some(first), Some(last)) = (first, last) else {
        return Err(gap(
            t,
            format!("fewer than two poses within ±{:.1} ms", half * 1e3),
        ));
    };
    let span = last.timestamp - first.timestamp;
    if span <= 0.0 {
        return Err(gap(t, "velocity window spans zero time"));
    }
    let world = (last.translation - first.translation) / span;
    let orientation = interpolate_pose(buffer, t)?.rotation;
    Ok(EgoState::new(orientation.inverse() * world))
}
