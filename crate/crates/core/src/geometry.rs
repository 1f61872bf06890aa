//! Rigid transforms, poses and per-point direction helpers.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::types::RadarPoint;

/// Positions closer to the sensor origin than this have no usable direction.
pub const MIN_POSITION_NORM: f64 = 1e-9;

/// A rotation followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::zeros())
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::new(x, y, z))
    }

    /// Pure rotation about +z by `yaw` radians.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::new(
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
            Vector3::zeros(),
        )
    }

    /// `self ∘ rhs`: the result applies `rhs` first, then `self`.
    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        let mut rotation = self.rotation * rhs.rotation;
        rotation.renormalize();
        RigidTransform {
            rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rotation = self.rotation.inverse();
        RigidTransform {
            rotation,
            translation: -(rotation * self.translation),
        }
    }

    pub fn transform_vector(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.translation.norm() <= eps && self.rotation.angle() <= eps
    }
}

/// Sensor pose in the world frame (world ← sensor) at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StampedPose {
    pub timestamp: f64,
    pub translation: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl StampedPose {
    pub fn new(timestamp: f64, translation: Vector3<f64>, rotation: UnitQuaternion<f64>) -> Self {
        Self {
            timestamp,
            translation,
            rotation,
        }
    }

    pub fn identity(timestamp: f64) -> Self {
        Self::new(timestamp, Vector3::zeros(), UnitQuaternion::identity())
    }

    /// The world ← sensor transform.
    pub fn transform(&self) -> RigidTransform {
        RigidTransform::new(self.rotation, self.translation)
    }
}

/// Azimuth and elevation of a point in degrees.
///
/// Azimuth is `atan2(y, x)`, positive toward +y, in (−180, 180]. Elevation is
/// measured from the x-y plane, positive toward +z, in [−90, 90].
pub fn spherical_angles(p: &RadarPoint) -> Result<(f64, f64)> {
    if p.x == 0.0 && p.y == 0.0 && p.z == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    let azimuth = p.y.atan2(p.x).to_degrees();
    let elevation = p.z.atan2(p.x.hypot(p.y)).to_degrees();
    // atan2(0, -x) is +180 but atan2(-0.0, -x) is -180; fold onto the half-open range.
    let azimuth = if azimuth == -180.0 { 180.0 } else { azimuth };
    Ok((azimuth, elevation))
}

/// Unit line-of-sight vector from the sensor toward `p`.
pub fn los_unit_vector(p: &RadarPoint) -> Result<Vector3<f64>> {
    let v = p.position();
    let n = v.norm();
    if n <= MIN_POSITION_NORM {
        return Err(Error::DegeneratePoint);
    }
    Ok(v / n)
}

/// Moves the point's position through `t`; Doppler, RCS and flag are copied.
pub fn apply_transform(t: &RigidTransform, p: &RadarPoint) -> RadarPoint {
    p.with_position(t.transform_vector(&p.position()))
}
