//! Synthetic radar scenes with exact ground truth.
//!
//! A scene is a set of walking pedestrians (vertical Gaussian blobs), static
//! wall segments, static clutter scattered over the sensor's field of view
//! and out-of-profile ghost returns, observed by a sensor that follows a waypoint path. Every point's
//! Doppler is synthesized from the relative velocity along its line of
//! sight, closing positive:
//!
//! `doppler = (v_ego − v_object) · r̂ + noise`
//!
//! so that subtracting `v_ego · r̂` leaves the object's own radial motion.
//!
//! All randomness comes from a ChaCha8 stream seeded by the scene seed, so a
//! given config and seed reproduces bit-identical output on every platform.

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector2, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::classification::ObjectType;
use crate::error::{Error, Result};
use crate::filtering::{builtin_profile, FilterProfile};
use crate::geometry::StampedPose;
use crate::io::records::{self, TruthObject, TruthRecord};
use crate::io::{create, open};
use crate::types::{RadarFrame, RadarPoint};

fn default_frame_rate() -> f64 {
    15.0
}
fn default_pose_rate() -> f64 {
    100.0
}
fn default_noise() -> f64 {
    0.05
}
fn default_profile() -> String {
    "indoor".into()
}
fn default_points() -> [usize; 2] {
    [5, 15]
}
fn default_spread() -> f64 {
    0.15
}
fn default_height() -> f64 {
    1.7
}
fn default_ped_rcs() -> [f64; 2] {
    [2.0, 2.0]
}
fn default_wall_rcs() -> [f64; 2] {
    [35.0, 5.0]
}
fn default_clutter_rcs() -> [f64; 2] {
    [-5.0, 55.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Seconds; the scene has `round(duration · frame_rate)` frames.
    pub duration: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default = "default_pose_rate")]
    pub pose_rate: f64,
    #[serde(default)]
    pub seed: u64,
    /// Expected static clutter points per frame.
    #[serde(default)]
    pub clutter_rate: f64,
    /// Expected ghost points per frame.
    #[serde(default)]
    pub ghost_rate: f64,
    /// Standard deviation of the Doppler noise, m/s.
    #[serde(default = "default_noise")]
    pub doppler_noise: f64,
    /// Profile that ghosts are generated to violate and that decides
    /// ground-truth visibility.
    #[serde(default = "default_profile")]
    pub reference_profile: String,
    /// Uniform RCS range of clutter points.
    #[serde(default = "default_clutter_rcs")]
    pub clutter_rcs: [f64; 2],
    #[serde(default)]
    pub clutter_field: ClutterField,
    pub ego: EgoPath,
    #[serde(default)]
    pub pedestrians: Vec<PedestrianConfig>,
    #[serde(default)]
    pub walls: Vec<WallConfig>,
}

/// Sensor-frame region where clutter appears, uniform over range, azimuth
/// and elevation cells (degrees) the way detector false alarms are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterField {
    pub range: [f64; 2],
    pub azimuth: [f64; 2],
    pub elevation: [f64; 2],
}

impl Default for ClutterField {
    fn default() -> Self {
        Self {
            range: [0.5, 20.0],
            azimuth: [-60.0, 60.0],
            elevation: [-15.0, 15.0],
        }
    }
}

/// Sensor trajectory. The sensor moves along the waypoints at `speed`, faces
/// along the current segment, and stops at the last waypoint. With a single
/// waypoint or zero speed it stays put facing `yaw_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoPath {
    pub waypoints: Vec<[f64; 3]>,
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub yaw_deg: f64,
}

/// A person walking back and forth along a ground-plane path that starts at
/// `initial_position` and visits `waypoints` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianConfig {
    pub initial_position: [f64; 2],
    #[serde(default)]
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default)]
    pub speed: f64,
    /// Inclusive range of points returned per frame.
    #[serde(default = "default_points")]
    pub points_per_frame: [usize; 2],
    /// Horizontal standard deviation of the blob, meters.
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Body height; points are spread uniformly from the ground up to it.
    #[serde(default = "default_height")]
    pub height: f64,
    /// Mean and standard deviation of point RCS.
    #[serde(default = "default_ped_rcs")]
    pub rcs: [f64; 2],
}

/// Vertical wall between two ground-plane endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallConfig {
    pub start: [f64; 2],
    pub end: [f64; 2],
    #[serde(default)]
    pub z_min: f64,
    pub z_max: f64,
    /// Expected points per square meter per frame.
    pub density: f64,
    #[serde(default = "default_wall_rcs")]
    pub rcs: [f64; 2],
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.duration) {
            return bad(format!("duration must be >= 0, got {}", self.duration));
        }
        if !finite_pos(self.frame_rate) || !finite_pos(self.pose_rate) {
            return bad("frame_rate and pose_rate must be > 0".into());
        }
        if !finite_nonneg(self.clutter_rate) || !finite_nonneg(self.ghost_rate) {
            return bad("clutter_rate and ghost_rate must be >= 0".into());
        }
        if !finite_nonneg(self.doppler_noise) {
            return bad("doppler_noise must be >= 0".into());
        }
        builtin_profile(&self.reference_profile).map_err(|_| {
            Error::Config(format!(
                "unknown reference_profile `{}`",
                self.reference_profile
            ))
        })?;
        if !(self.clutter_rcs[0] < self.clutter_rcs[1]) {
            return bad("clutter_rcs must be [min, max] with min < max".into());
        }
        let f = &self.clutter_field;
        if !(f.range[0] > 0.0 && f.range[0] < f.range[1])
            || !(f.azimuth[0] < f.azimuth[1] && f.azimuth[0] >= -180.0 && f.azimuth[1] <= 180.0)
            || !(f.elevation[0] < f.elevation[1]
                && f.elevation[0] >= -90.0
                && f.elevation[1] <= 90.0)
        {
            return bad(
                "clutter_field needs increasing range > 0, azimuth and elevation bounds".into(),
            );
        }
        if self.ego.waypoints.is_empty() {
            return bad("ego.waypoints must not be empty".into());
        }
        if !finite_nonneg(self.ego.speed) {
            return bad("ego.speed must be >= 0".into());
        }
        for (i, p) in self.pedestrians.iter().enumerate() {
            if !finite_nonneg(p.speed) {
                return bad(format!("pedestrians[{i}].speed must be >= 0"));
            }
            if p.points_per_frame[0] > p.points_per_frame[1] {
                return bad(format!(
                    "pedestrians[{i}].points_per_frame must be [min, max]"
                ));
            }
            if !finite_nonneg(p.spread) || !finite_pos(p.height) || !finite_nonneg(p.rcs[1]) {
                return bad(format!(
                    "pedestrians[{i}] spread, height or rcs spread invalid"
                ));
            }
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !(w.z_max > w.z_min) || !finite_nonneg(w.density) || !finite_nonneg(w.rcs[1]) {
                return bad(format!(
                    "walls[{i}] needs z_max > z_min and non-negative density"
                ));
            }
        }
        Ok(())
    }
}

/// What produced a simulated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Pedestrian(usize),
    Wall(usize),
    Clutter,
    Ghost,
}

/// Provenance of one simulated point, kept alongside the frames in memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLabel {
    pub kind: PointKind,
    /// Doppler before noise; for ghosts, the value that was emitted.
    pub ideal_doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub frames: Vec<RadarFrame>,
    pub poses: Vec<StampedPose>,
    pub truth: Vec<TruthRecord>,
    /// One label per point, parallel to `frames`.
    pub labels: Vec<Vec<PointLabel>>,
}

/// The three artifacts that make up a scene on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFiles {
    pub frames: Vec<RadarFrame>,
    pub poses: Vec<StampedPose>,
    pub truth: Vec<TruthRecord>,
}

impl From<Scene> for SceneFiles {
    fn from(s: Scene) -> Self {
        Self {
            frames: s.frames,
            poses: s.poses,
            truth: s.truth,
        }
    }
}

/// Position and velocity at `t` along a ground path walked back and forth.
fn ping_pong(path: &[Vector2<f64>], speed: f64, t: f64) -> (Vector2<f64>, Vector2<f64>) {
    let length: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if path.len() < 2 || length <= 0.0 || speed <= 0.0 {
        return (path[0], Vector2::zeros());
    }
    let s = (speed * t).rem_euclid(2.0 * length);
    let (d, sign) = if s <= length {
        (s, 1.0)
    } else {
        (2.0 * length - s, -1.0)
    };
    let (pos, dir) = along(path, d);
    (pos, dir * speed * sign)
}

/// Point at arc length `d` and the unit direction of its segment.
fn along<const D: usize>(
    path: &[nalgebra::SVector<f64, D>],
    d: f64,
) -> (nalgebra::SVector<f64, D>, nalgebra::SVector<f64, D>) {
    let mut remaining = d.max(0.0);
    let mut last_dir = nalgebra::SVector::<f64, D>::zeros();
    for w in path.windows(2) {
        let seg = w[1] - w[0];
        let len = seg.norm();
        if len <= 0.0 {
            continue;
        }
        last_dir = seg / len;
        if remaining <= len {
            return (w[0] + last_dir * remaining, last_dir);
        }
        remaining -= len;
    }
    (*path.last().expect("non-empty path"), last_dir)
}

struct EgoSample {
    position: Vector3<f64>,
    rotation: UnitQuaternion<f64>,
    velocity: Vector3<f64>,
}

fn ego_at(ego: &EgoPath, t: f64) -> EgoSample {
    let path: Vec<Vector3<f64>> = ego.waypoints.iter().map(|w| Vector3::from(*w)).collect();
    let length: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let fixed_yaw =
        || UnitQuaternion::from_axis_angle(&Vector3::z_axis(), ego.yaw_deg.to_radians());
    if path.len() < 2 || length <= 0.0 || ego.speed <= 0.0 {
        return EgoSample {
            position: path[0],
            rotation: fixed_yaw(),
            velocity: Vector3::zeros(),
        };
    }
    let d = ego.speed * t;
    let (position, dir) = along(&path, d);
    let velocity = if d < length {
        dir * ego.speed
    } else {
        Vector3::zeros()
    };
    EgoSample {
        position,
        rotation: UnitQuaternion::from_axis_angle(&Vector3::z_axis(), dir.y.atan2(dir.x)),
        velocity,
    }
}

fn count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        return mean;
    }
    Normal::new(mean, std).expect("finite std").sample(rng)
}

struct Observer<'a> {
    ego: &'a EgoSample,
    noise: f64,
}

impl Observer<'_> {
    /// World point with world velocity `u` as seen by the sensor.
    fn observe(
        &self,
        rng: &mut ChaCha8Rng,
        world: Vector3<f64>,
        u: Vector3<f64>,
        rcs: f64,
        kind: PointKind,
    ) -> Option<(RadarPoint, PointLabel)> {
        let inv = self.ego.rotation.inverse();
        let s = inv * (world - self.ego.position);
        let n = s.norm();
        if n < 1e-6 {
            return None;
        }
        let relative = inv * (self.ego.velocity - u);
        let ideal = relative.dot(&(s / n));
        let doppler = ideal + normal(rng, 0.0, self.noise);
        let dyn_flag = u.norm() > 0.0;
        Some((
            RadarPoint::new(s.x, s.y, s.z, doppler, rcs, dyn_flag),
            PointLabel {
                kind,
                ideal_doppler: ideal,
            },
        ))
    }
}

const GHOST_MARGIN: f64 = 0.5;

/// A sensor-frame point that violates `profile` on RCS, azimuth or elevation.
fn ghost(rng: &mut ChaCha8Rng, profile: &FilterProfile) -> RadarPoint {
    let range = rng.random_range(1.0..20.0);
    let inside = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.random_range(lo..=hi);
    let mut az = inside(rng, profile.az_min, profile.az_max);
    let mut el = inside(rng, profile.el_min, profile.el_max);
    let mut rcs = inside(
        rng,
        profile.rcs_min + GHOST_MARGIN,
        profile.rcs_max - GHOST_MARGIN,
    );
    match rng.random_range(0..3u8) {
        0 => rcs = profile.rcs_max + rng.random_range(GHOST_MARGIN..20.0),
        1 => {
            let out = rng.random_range(GHOST_MARGIN..40.0);
            az = if rng.random_bool(0.5) {
                (profile.az_max + out).min(179.0)
            } else {
                (profile.az_min - out).max(-179.0)
            };
        }
        _ => {
            let out = rng.random_range(GHOST_MARGIN..30.0);
            el = if rng.random_bool(0.5) {
                (profile.el_max + out).min(89.0)
            } else {
                (profile.el_min - out).max(-89.0)
            };
        }
    }
    let (az, el) = (az.to_radians(), el.to_radians());
    RadarPoint::new(
        range * el.cos() * az.cos(),
        range * el.cos() * az.sin(),
        range * el.sin(),
        rng.random_range(-3.0..3.0),
        rcs,
        false,
    )
}

/// Generates frames at `frame_rate`, poses at `pose_rate` (running a little
/// past the last frame so every frame can be bracketed), and ground truth.
pub fn generate_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let profile = builtin_profile(&cfg.reference_profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n_poses = ((cfg.duration + 0.25) * cfg.pose_rate).ceil() as usize + 1;
    let poses = (0..n_poses)
        .map(|j| {
            let t = j as f64 / cfg.pose_rate;
            let e = ego_at(&cfg.ego, t);
            StampedPose::new(t, e.position, e.rotation)
        })
        .collect();

    let ped_paths: Vec<Vec<Vector2<f64>>> = cfg
        .pedestrians
        .iter()
        .map(|p| {
            std::iter::once(p.initial_position)
                .chain(p.waypoints.iter().copied())
                .map(Vector2::from)
                .collect()
        })
        .collect();

    let mut frames = Vec::with_capacity(cfg.frame_count());
    let mut truth = Vec::with_capacity(cfg.frame_count());
    let mut labels = Vec::with_capacity(cfg.frame_count());

    for k in 0..cfg.frame_count() {
        let t = k as f64 / cfg.frame_rate;
        let ego = ego_at(&cfg.ego, t);
        let obs = Observer {
            ego: &ego,
            noise: cfg.doppler_noise,
        };
        let mut points: Vec<(RadarPoint, PointLabel)> = Vec::new();
        let mut objects = Vec::new();

        for (i, w) in cfg.walls.iter().enumerate() {
            let a = Vector2::from(w.start);
            let b = Vector2::from(w.end);
            let area = (b - a).norm() * (w.z_max - w.z_min);
            for _ in 0..count(&mut rng, w.density * area) {
                let g = a + (b - a) * rng.random::<f64>();
                let z = rng.random_range(w.z_min..w.z_max);
                let rcs = normal(&mut rng, w.rcs[0], w.rcs[1]);
                points.extend(obs.observe(
                    &mut rng,
                    Vector3::new(g.x, g.y, z),
                    Vector3::zeros(),
                    rcs,
                    PointKind::Wall(i),
                ));
            }
        }

        let inv = ego.rotation.inverse();
        for (i, (p, path)) in cfg.pedestrians.iter().zip(&ped_paths).enumerate() {
            let (c, v) = ping_pong(path, p.speed, t);
            let u = Vector3::new(v.x, v.y, 0.0);
            let n = rng.random_range(p.points_per_frame[0]..=p.points_per_frame[1]);
            for _ in 0..n {
                let x = c.x + normal(&mut rng, 0.0, p.spread);
                let y = c.y + normal(&mut rng, 0.0, p.spread);
                let z = rng.random_range(0.0..p.height);
                let rcs = normal(&mut rng, p.rcs[0], p.rcs[1]);
                points.extend(obs.observe(
                    &mut rng,
                    Vector3::new(x, y, z),
                    u,
                    rcs,
                    PointKind::Pedestrian(i),
                ));
            }
            let centre = inv * (Vector3::new(c.x, c.y, p.height / 2.0) - ego.position);
            let azimuth = centre.y.atan2(centre.x).to_degrees();
            let visible =
                centre.xy().norm() > 0.5 && (profile.az_min..=profile.az_max).contains(&azimuth);
            let vel = inv * u;
            objects.push(TruthObject {
                id: i as u64,
                class: ObjectType::Pedestrian,
                centroid: [centre.x, centre.y, centre.z],
                velocity: [vel.x, vel.y, vel.z],
                visible,
            });
        }

        let field = &cfg.clutter_field;
        for _ in 0..count(&mut rng, cfg.clutter_rate) {
            let range = rng.random_range(field.range[0]..field.range[1]);
            let az = rng
                .random_range(field.azimuth[0]..field.azimuth[1])
                .to_radians();
            let el = rng
                .random_range(field.elevation[0]..field.elevation[1])
                .to_radians();
            let s = Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()) * range;
            let w = ego.position + ego.rotation * s;
            let rcs = rng.random_range(cfg.clutter_rcs[0]..cfg.clutter_rcs[1]);
            points.extend(obs.observe(&mut rng, w, Vector3::zeros(), rcs, PointKind::Clutter));
        }

        for _ in 0..count(&mut rng, cfg.ghost_rate) {
            let g = ghost(&mut rng, &profile);
            points.push((
                g,
                PointLabel {
                    kind: PointKind::Ghost,
                    ideal_doppler: g.doppler,
                },
            ));
        }

        points.shuffle(&mut rng);
        let (pts, lbl): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        frames.push(RadarFrame::new(t, pts));
        labels.push(lbl);
        truth.push(TruthRecord { t, objects });
    }

    Ok(Scene {
        frames,
        poses,
        truth,
        labels,
    })
}

pub fn write_scene(files: &SceneFiles, frames: &Path, poses: &Path, truth: &Path) -> Result<()> {
    records::write_frames(create(frames)?, &files.frames)?;
    records::write_poses(create(poses)?, &files.poses)?;
    records::write_truth(create(truth)?, &files.truth)?;
    Ok(())
}

pub fn read_scene(frames: &Path, poses: &Path, truth: &Path) -> Result<SceneFiles> {
    Ok(SceneFiles {
        frames: records::read_frames(open(frames)?)?,
        poses: records::read_poses(open(poses)?)?,
        truth: records::read_truth(open(truth)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtering::point_passes;
    use crate::geometry::los_unit_vector;

    fn base() -> SceneConfig {
        SceneConfig {
            duration: 2.0,
            frame_rate: 15.0,
            pose_rate: 100.0,
            seed: 1,
            clutter_rate: 0.0,
            ghost_rate: 0.0,
            doppler_noise: 0.05,
            reference_profile: "indoor".into(),
            clutter_rcs: default_clutter_rcs(),
            clutter_field: ClutterField::default(),
            ego: EgoPath {
                waypoints: vec![[0.0, 0.0, 1.0]],
                speed: 0.0,
                yaw_deg: 0.0,
            },
            pedestrians: vec![],
            walls: vec![],
        }
    }

    #[test]
    fn frame_and_pose_timing() {
        let s = generate_scene(&base()).unwrap();
        assert_eq!(s.frames.len(), 30);
        assert_eq!(s.truth.len(), 30);
        assert_eq!(s.frames[3].timestamp, 0.2);
        assert!(s.poses.last().unwrap().timestamp >= 2.0 + 0.2);
        assert_eq!(s.poses[1].timestamp, 0.01);
    }

    #[test]
    fn same_seed_same_scene() {
        let mut cfg = base();
        cfg.clutter_rate = 20.0;
        cfg.ghost_rate = 20.0;
        let a = generate_scene(&cfg).unwrap();
        let b = generate_scene(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 2;
        assert_ne!(generate_scene(&cfg).unwrap().frames, a.frames);
    }

    #[test]
    fn static_scene_has_noise_only_doppler() {
        let mut cfg = base();
        cfg.clutter_rate = 40.0;
        cfg.walls.push(WallConfig {
            start: [10.0, -2.0],
            end: [10.0, 2.0],
            z_min: 0.0,
            z_max: 3.0,
            density: 2.0,
            rcs: default_wall_rcs(),
        });
        let s = generate_scene(&cfg).unwrap();
        let all: Vec<f64> = s
            .frames
            .iter()
            .flat_map(|f| f.points().iter().map(|p| p.doppler))
            .collect();
        assert!(all.len() > 500);
        assert!(all
            .iter()
            .all(|d| d.abs() <= 4.0 * cfg.doppler_noise + 1e-12 || d.abs() < 0.3));
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var.sqrt() - 0.05).abs() < 0.005);
    }

    #[test]
    fn walker_toward_sensor_reads_positive() {
        let mut cfg = base();
        cfg.doppler_noise = 0.0;
        cfg.pedestrians.push(PedestrianConfig {
            initial_position: [12.0, 0.0],
            waypoints: vec![[2.0, 0.0]],
            speed: 1.4,
            points_per_frame: [10, 10],
            spread: 0.0,
            height: 1.7,
            rcs: default_ped_rcs(),
        });
        let s = generate_scene(&cfg).unwrap();
        let f = &s.frames[5];
        assert_eq!(f.len(), 10);
        for p in f.points() {
            // Radial component of a 1.4 m/s approach, reduced slightly by the height offset.
            let r = los_unit_vector(p).unwrap();
            assert!((p.doppler - 1.4 * r.x).abs() < 1e-12);
            assert!(p.doppler > 1.3 && p.doppler <= 1.4);
        }
        let gt = &s.truth[5].objects[0];
        assert!(gt.visible);
        assert!((gt.velocity[0] + 1.4).abs() < 1e-12);
    }

    #[test]
    fn ping_pong_reverses() {
        let path = [Vector2::new(0.0, 0.0), Vector2::new(2.0, 0.0)];
        let (p, v) = ping_pong(&path, 1.0, 3.0);
        assert!((p.x - 1.0).abs() < 1e-12);
        assert_eq!(v, Vector2::new(-1.0, 0.0));
        let (p, v) = ping_pong(&path, 1.0, 4.5);
        assert!((p.x - 0.5).abs() < 1e-12);
        assert_eq!(v, Vector2::new(1.0, 0.0));
    }

    #[test]
    fn ego_faces_along_path_and_stops() {
        let ego = EgoPath {
            waypoints: vec![[0.0, 0.0, 1.0], [0.0, 4.0, 1.0]],
            speed: 2.0,
            yaw_deg: 0.0,
        };
        let e = ego_at(&ego, 1.0);
        assert!((e.position - Vector3::new(0.0, 2.0, 1.0)).norm() < 1e-12);
        assert!((e.rotation.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(ego_at(&ego, 5.0).velocity, Vector3::zeros());
    }

    #[test]
    fn ghosts_fail_their_profile() {
        let mut cfg = base();
        cfg.ghost_rate = 200.0;
        for name in ["indoor", "outdoor"] {
            cfg.reference_profile = name.into();
            let profile = builtin_profile(name).unwrap();
            let s = generate_scene(&cfg).unwrap();
            let n: usize = s.frames.iter().map(|f| f.len()).sum();
            assert!(n > 1000);
            for f in &s.frames {
                assert!(f.points().iter().all(|p| !point_passes(&profile, p)));
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = base();
        cfg.frame_rate = 0.0;
        assert!(matches!(generate_scene(&cfg), Err(Error::Config(_))));
        let mut cfg = base();
        cfg.ego.waypoints.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = base();
        cfg.reference_profile = "tunnel".into();
        assert!(cfg.validate().is_err());
        assert!(
            SceneConfig::parse("duration = 1.0\n[ego]\nwaypoints = [[0,0,1]]\nbogus = 1\n")
                .is_err()
        );
    }

    #[test]
    fn zero_length_scene() {
        let mut cfg = base();
        cfg.duration = 0.0;
        let s = generate_scene(&cfg).unwrap();
        assert!(s.frames.is_empty() && s.truth.is_empty());
        assert!(!s.poses.is_empty());
    }
}
