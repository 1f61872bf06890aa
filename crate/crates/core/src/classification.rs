//! Stage 4: rule-based typing, motion state and line-of-sight heading.

use serde::{Deserialize, Serialize};

use crate::clustering::{Cluster, ClusterDescriptors};
use crate::error::{Error, Result};

/// Axis-aligned extent in the sensor frame: `l` along x, `w` along y, `h`
/// along z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub w: f64,
    pub l: f64,
    pub h: f64,
    pub centroid: [f64; 3],
}

pub fn bounding_box(c: &Cluster) -> Result<BoundingBox> {
    let first = c.points.first().ok_or(Error::EmptyCluster)?;
    let mut lo = first.position();
    let mut hi = lo;
    let mut sum = nalgebra::Vector3::zeros();
    for p in &c.points {
        let v = p.position();
        lo = lo.inf(&v);
        hi = hi.sup(&v);
        sum += v;
    }
    let mean = sum / c.len() as f64;
    Ok(BoundingBox {
        w: hi.y - lo.y,
        l: hi.x - lo.x,
        h: hi.z - lo.z,
        centroid: [mean.x, mean.y, mean.z],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRules {
    pub ped_w_min: f64,
    pub ped_w_max: f64,
    pub ped_h_max: f64,
    pub ped_l_max: f64,
    pub ped_rcs_abs_max: f64,
    pub large_extent_min: f64,
    pub large_rcs_min: f64,
    pub v_static: f64,
}

impl Default for ClassifierRules {
    fn default() -> Self {
        Self {
            ped_w_min: 0.5,
            ped_w_max: 1.0,
            ped_h_max: 2.0,
            ped_l_max: 1.0,
            ped_rcs_abs_max: 10.0,
            large_extent_min: 1.5,
            large_rcs_min: 25.0,
            v_static: 0.25,
        }
    }
}

impl ClassifierRules {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.ped_w_min,
            self.ped_w_max,
            self.ped_h_max,
            self.ped_l_max,
            self.ped_rcs_abs_max,
            self.large_extent_min,
            self.large_rcs_min,
            self.v_static,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(
                "classifier thresholds must be positive".into(),
            ));
        }
        if !(self.ped_w_min < self.ped_w_max) {
            return Err(Error::Config(
                "classifier.ped_w_min must be below classifier.ped_w_max".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectType {
    Pedestrian,
    LargeObject,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionState {
    Static,
    Dynamic,
}

/// Direction of motion along the sensor line of sight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heading {
    Approaching,
    Receding,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedObject {
    pub object_type: ObjectType,
    pub motion: MotionState,
    pub heading: Heading,
    pub bbox: BoundingBox,
    pub descriptors: ClusterDescriptors,
    pub frame_timestamp: f64,
}

pub fn object_type(b: &BoundingBox, d: &ClusterDescriptors, rules: &ClassifierRules) -> ObjectType {
    let pedestrian = (rules.ped_w_min..=rules.ped_w_max).contains(&b.w)
        && b.h <= rules.ped_h_max
        && b.l <= rules.ped_l_max
        && d.modal_rcs.abs() <= rules.ped_rcs_abs_max;
    if pedestrian {
        ObjectType::Pedestrian
    } else if b.w.max(b.l) >= rules.large_extent_min || d.modal_rcs >= rules.large_rcs_min {
        ObjectType::LargeObject
    } else {
        ObjectType::Unknown
    }
}

/// Motion and heading from the compensated mean Doppler (closing positive).
pub fn motion(d: &ClusterDescriptors, rules: &ClassifierRules) -> (MotionState, Heading) {
    let v = d.comp_mean_doppler;
    if v.abs() > rules.v_static {
        let heading = if v > 0.0 {
            Heading::Approaching
        } else {
            Heading::Receding
        };
        (MotionState::Dynamic, heading)
    } else {
        (MotionState::Static, Heading::None)
    }
}

pub fn classify(
    bbox: BoundingBox,
    descriptors: ClusterDescriptors,
    rules: &ClassifierRules,
    frame_timestamp: f64,
) -> DetectedObject {
    let (motion, heading) = motion(&descriptors, rules);
    DetectedObject {
        object_type: object_type(&bbox, &descriptors, rules),
        motion,
        heading,
        bbox,
        descriptors,
        frame_timestamp,
    }
}
