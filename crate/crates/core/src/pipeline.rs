//! Frame-by-frame driver for the four stages with a two-frame window.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classification::{bounding_box, classify, ClassifierRules, DetectedObject};
use crate::clustering::{
    describe, euclidean_cluster, ClusterDescriptors, ClusteringParams, RetentionRules,
};
use crate::ego_motion::{
    accumulate, accumulate_compensated, ego_velocity, interpolate_pose, relative_transform,
    EgoState, PoseBuffer,
};
use crate::error::{Error, Result};
use crate::filtering::{filter_frame, FilterProfile, RejectionStats};
use crate::geometry::{RigidTransform, StampedPose};
use crate::types::RadarFrame;

/// Sign convention of the Doppler values coming off the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DopplerSign {
    #[default]
    ClosingPositive,
    RecedingPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub profile: FilterProfile,
    pub clustering: ClusteringParams,
    pub retention: RetentionRules,
    pub classifier: ClassifierRules,
    pub doppler_sign: DopplerSign,
}

impl PipelineConfig {
    /// Defaults for a given filter profile; the retention RCS window follows
    /// the profile's RCS bounds.
    pub fn with_profile(profile: FilterProfile) -> Self {
        Self {
            profile,
            clustering: ClusteringParams::default(),
            retention: RetentionRules::from_profile(&profile),
            classifier: ClassifierRules::default(),
            doppler_sign: DopplerSign::ClosingPositive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.clustering.validate()?;
        self.retention.validate()?;
        self.classifier.validate()
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::with_profile(FilterProfile::indoor())
    }
}

/// Wall-clock time spent in each stage, microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLatencies {
    pub filter: u64,
    pub accumulate: u64,
    pub cluster: u64,
    pub describe: u64,
    pub classify: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCounts {
    pub raw: usize,
    pub filtered: usize,
    pub accumulated: usize,
    pub clusters: usize,
    pub retained: usize,
}

/// Membership and descriptors of one cluster, retained or not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDump {
    pub members: Vec<usize>,
    pub descriptors: ClusterDescriptors,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub timestamp: f64,
    pub detections: Vec<DetectedObject>,
    /// Set when no pose or ego velocity was available for this frame and the
    /// platform was assumed stationary.
    pub degraded: bool,
    pub stage_latencies: StageLatencies,
    pub point_counts: PointCounts,
    pub rejections: RejectionStats,
    /// Every cluster of the accumulated cloud, present when dumping is enabled.
    pub clusters: Option<Vec<ClusterDump>>,
    /// The accumulated cloud the clusters index into, present when dumping is enabled.
    pub accumulated: Option<RadarFrame>,
}

#[derive(Debug, Clone)]
struct Previous {
    frame: RadarFrame,
    pose: Option<StampedPose>,
    ego: Option<EgoState>,
}

/// Streaming detector. Holds the previous filtered frame and nothing else
/// between calls.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    previous: Option<Previous>,
    dump_clusters: bool,
}

fn micros(since: Instant) -> u64 {
    since.elapsed().as_micros() as u64
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            previous: None,
            dump_clusters: false,
        })
    }

    pub fn with_cluster_dump(mut self, enabled: bool) -> Self {
        self.dump_clusters = enabled;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }

    /// Runs one radar frame through filter, accumulation, clustering,
    /// retention and classification.
    ///
    /// Missing odometry does not fail the frame: the platform is treated as
    /// stationary, previous points are carried over untransformed, and the
    /// result is flagged `degraded`. Frames that do not advance in time are
    /// rejected and leave the pipeline state untouched.
    pub fn process_frame(&mut self, raw: &RadarFrame, poses: &PoseBuffer) -> Result<FrameResult> {
        if let Some(prev) = &self.previous {
            if !(raw.timestamp > prev.frame.timestamp) {
                return Err(Error::FrameOrder {
                    prev: prev.frame.timestamp,
                    curr: raw.timestamp,
                });
            }
        }
        let cfg = self.config;
        let start = Instant::now();
        let mut lat = StageLatencies::default();

        let stage = Instant::now();
        let (filtered, rejections) = match cfg.doppler_sign {
            DopplerSign::ClosingPositive => filter_frame(&cfg.profile, raw),
            DopplerSign::RecedingPositive => {
                let mut flipped = raw.clone();
                for p in flipped.points_mut() {
                    p.doppler = -p.doppler;
                }
                filter_frame(&cfg.profile, &flipped)
            }
        };
        lat.filter = micros(stage);

        let stage = Instant::now();
        let pose = interpolate_pose(poses, raw.timestamp).ok();
        let ego = ego_velocity(poses, raw.timestamp).ok();
        let degraded = pose.is_none() || ego.is_none();
        let accumulated = match &self.previous {
            None => filtered.clone(),
            Some(prev) => {
                let t = match (prev.pose, pose) {
                    (Some(a), Some(b)) => relative_transform(&a, &b),
                    _ => RigidTransform::identity(),
                };
                match (prev.ego, ego) {
                    (Some(e0), Some(e1)) => {
                        accumulate_compensated(&prev.frame, &filtered, &t, &e0, &e1)?
                    }
                    _ => accumulate(&prev.frame, &filtered, &t)?,
                }
            }
        };
        lat.accumulate = micros(stage);

        let stage = Instant::now();
        let clusters = euclidean_cluster(accumulated.points(), &cfg.clustering);
        lat.cluster = micros(stage);

        let stage = Instant::now();
        let ego_now = ego.unwrap_or_else(EgoState::zero);
        let descriptors = clusters
            .iter()
            .map(|c| describe(c, &ego_now, &cfg.clustering))
            .collect::<Result<Vec<_>>>()?;
        let keep: Vec<bool> = descriptors.iter().map(|d| cfg.retention.keeps(d)).collect();
        lat.describe = micros(stage);

        let stage = Instant::now();
        let mut detections = Vec::new();
        for ((c, d), &k) in clusters.iter().zip(&descriptors).zip(&keep) {
            if k {
                detections.push(classify(
                    bounding_box(c)?,
                    *d,
                    &cfg.classifier,
                    raw.timestamp,
                ));
            }
        }
        lat.classify = micros(stage);

        let point_counts = PointCounts {
            raw: raw.len(),
            filtered: filtered.len(),
            accumulated: accumulated.len(),
            clusters: clusters.len(),
            retained: detections.len(),
        };
        let dump = self.dump_clusters.then(|| {
            clusters
                .iter()
                .zip(&descriptors)
                .zip(&keep)
                .map(|((c, d), &retained)| ClusterDump {
                    members: c.members.clone(),
                    descriptors: *d,
                    retained,
                })
                .collect()
        });
        let accumulated = self.dump_clusters.then_some(accumulated);

        self.previous = Some(Previous {
            frame: filtered,
            pose,
            ego,
        });
        lat.total = micros(start);

        Ok(FrameResult {
            timestamp: raw.timestamp,
            detections,
            degraded,
            stage_latencies: lat,
            point_counts,
            rejections,
            clusters: dump,
            accumulated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::{Heading, MotionState, ObjectType};
    use crate::types::RadarPoint;
    use nalgebra::{UnitQuaternion, Vector3};

    /// A compact pedestrian-sized blob at range `x` with the given Doppler.
    fn walker(x: f64, doppler: f64) -> Vec<RadarPoint> {
        let offsets = [(-0.3, 0.0), (0.0, 0.3), (0.3, 0.1), (0.1, 0.5), (-0.1, 0.8)];
        offsets
            .iter()
            .map(|&(dy, dz)| RadarPoint::new(x, dy, dz, doppler, 2.5, true))
            .collect()
    }

    fn static_poses(until: f64) -> PoseBuffer {
        let mut b = PoseBuffer::new(4096);
        let mut t = 0.0;
        while t <= until + 1e-9 {
            b.push(StampedPose::identity(t)).unwrap();
            t += 0.01;
        }
        b
    }

    #[test]
    fn first_frame_runs_without_accumulation() {
        let mut p = Pipeline::new(PipelineConfig::default()).unwrap();
        let poses = static_poses(1.0);
        let r = p
            .process_frame(&RadarFrame::new(0.5, walker(8.0, 1.0)), &poses)
            .unwrap();
        assert!(!r.degraded);
        assert_eq!(r.point_counts.accumulated, r.point_counts.filtered);
        assert_eq!(r.detections.len(), 1);
        let d = &r.detections[0];
        assert_eq!(d.object_type, ObjectType::Pedestrian);
        assert_eq!(
            (d.motion, d.heading),
            (MotionState::Dynamic, Heading::Approaching)
        );
    }

    #[test]
    fn second_frame_accumulates() {
        let mut p = Pipeline::new(PipelineConfig::default()).unwrap();
        let poses = static_poses(1.0);
        p.process_frame(&RadarFrame::new(0.2, walker(8.0, 1.0)), &poses)
            .unwrap();
        let r = p
            .process_frame(&RadarFrame::new(0.3, walker(7.9, 1.0)), &poses)
            .unwrap();
        assert_eq!(r.point_counts.accumulated, 10);
        assert_eq!(r.detections.len(), 1);
        assert_eq!(r.detections[0].descriptors.point_count, 10);
    }

    #[test]
    fn missing_poses_degrade_but_do_not_fail() {
        let mut p = Pipeline::new(PipelineConfig::default()).unwrap();
        let r = p
            .process_frame(
                &RadarFrame::new(0.0, walker(8.0, 1.0)),
                &PoseBuffer::default(),
            )
            .unwrap();
        assert!(r.degraded);
        assert_eq!(r.detections.len(), 1);
        let r = p
            .process_frame(
                &RadarFrame::new(0.1, walker(8.0, 1.0)),
                &PoseBuffer::default(),
            )
            .unwrap();
        assert!(r.degraded);
        assert_eq!(r.point_counts.accumulated, 10);
    }

    #[test]
    fn out_of_order_frame_rejected_and_state_kept() {
        let mut p = Pipeline::new(PipelineConfig::default()).unwrap();
        let poses = static_poses(1.0);
        p.process_frame(&RadarFrame::new(0.5, walker(8.0, 1.0)), &poses)
            .unwrap();
        assert!(matches!(
            p.process_frame(&RadarFrame::new(0.5, walker(8.0, 1.0)), &poses),
            Err(Error::FrameOrder { .. })
        ));
        assert!(p
            .process_frame(&RadarFrame::new(0.4, vec![]), &poses)
            .is_err());
        let r = p
            .process_frame(&RadarFrame::new(0.6, vec![]), &poses)
            .unwrap();
        assert_eq!(r.point_counts.accumulated, 5);
    }

    #[test]
    fn receding_positive_sensor_is_normalised() {
        let cfg = PipelineConfig {
            doppler_sign: DopplerSign::RecedingPositive,
            ..Default::default()
        };
        let mut p = Pipeline::new(cfg).unwrap();
        let r = p
            .process_frame(&RadarFrame::new(0.5, walker(8.0, 1.0)), &static_poses(1.0))
            .unwrap();
        assert_eq!(r.detections[0].heading, Heading::Receding);
    }

    #[test]
    fn moving_platform_compensates_static_scene() {
        // Platform drives along +x at 2 m/s past a static pole-like cluster.
        let speed = 2.0;
        let mut poses = PoseBuffer::new(4096);
        for i in 0..200 {
            let t = i as f64 * 0.01;
            poses
                .push(StampedPose::new(
                    t,
                    Vector3::new(speed * t, 0.0, 0.0),
                    UnitQuaternion::identity(),
                ))
                .unwrap();
        }
        let world: Vec<Vector3<f64>> = (0..6)
            .map(|i| Vector3::new(12.0, -0.2 + 0.08 * i as f64, 0.1 * i as f64))
            .collect();
        let frame_at = |t: f64| {
            let pts = world
                .iter()
                .map(|w| {
                    let s = w - Vector3::new(speed * t, 0.0, 0.0);
                    let doppler = speed * s.x / s.norm();
                    RadarPoint::new(s.x, s.y, s.z, doppler, 30.0, false)
                })
                .collect();
            RadarFrame::new(t, pts)
        };
        let mut p = Pipeline::new(PipelineConfig::default())
            .unwrap()
            .with_cluster_dump(true);
        for k in 1..10 {
            let t = 0.2 + k as f64 / 15.0;
            let r = p.process_frame(&frame_at(t), &poses).unwrap();
            assert!(!r.degraded);
            let dump = r.clusters.unwrap();
            assert_eq!(dump.len(), 1);
            assert!(dump[0].descriptors.comp_mean_doppler.abs() < 1e-9);
            assert!(dump[0].descriptors.mean_doppler > 1.9);
            assert!(r.detections.iter().all(|d| d.motion == MotionState::Static));
        }
    }
}
