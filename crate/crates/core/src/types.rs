//! Radar detections and frames.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// A single radar detection in the sensor frame (x forward, y left, z up).
///
/// `doppler` is the radial velocity in m/s, positive when the reflector is
/// closing on the sensor. `rcs` is the sensor-reported cross section, treated
/// as a unitless scalar. `dyn_flag` is the vendor dynamic/static bit; it is
/// carried through the pipeline but no stage reads it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub doppler: f64,
    pub rcs: f64,
    pub dyn_flag: bool,
}

impl RadarPoint {
    pub fn new(x: f64, y: f64, z: f64, doppler: f64, rcs: f64, dyn_flag: bool) -> Self {
        Self {
            x,
            y,
            z,
            doppler,
            rcs,
            dyn_flag,
        }
    }

    /// Point at `(x, y, z)` with zero Doppler, zero RCS and the flag cleared.
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, 0.0, 0.0, false)
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn with_position(mut self, p: Vector3<f64>) -> Self {
        self.x = p.x;
        self.y = p.y;
        self.z = p.z;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.doppler.is_finite()
            && self.rcs.is_finite()
    }
}

/// Which radar epoch a point of an accumulated frame came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    Current,
    AccumulatedPrevious,
}

/// A timestamped point cloud. Every point carries a [`PointSource`] tag,
/// which is `Current` for everything that did not come out of accumulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarFrame {
    pub timestamp: f64,
    points: Vec<RadarPoint>,
    sources: Vec<PointSource>,
}

impl RadarFrame {
    pub fn new(timestamp: f64, points: Vec<RadarPoint>) -> Self {
        let sources = vec![PointSource::Current; points.len()];
        Self {
            timestamp,
            points,
            sources,
        }
    }

    pub fn empty(timestamp: f64) -> Self {
        Self::new(timestamp, Vec::new())
    }

    /// Builds a frame from points and their tags.
    ///
    /// Panics if the two vectors differ in length.
    pub fn from_tagged(timestamp: f64, points: Vec<RadarPoint>, sources: Vec<PointSource>) -> Self {
        assert_eq!(points.len(), sources.len(), "one source tag per point");
        Self {
            timestamp,
            points,
            sources,
        }
    }

    pub fn points(&self) -> &[RadarPoint] {
        &self.points
    }

    pub fn sources(&self) -> &[PointSource] {
        &self.sources
    }

    pub fn points_mut(&mut self) -> &mut [RadarPoint] {
        &mut self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: RadarPoint, source: PointSource) {
        self.points.push(point);
        self.sources.push(source);
    }

    pub fn iter_tagged(&self) -> impl Iterator<Item = (&RadarPoint, PointSource)> {
        self.points.iter().zip(self.sources.iter().copied())
    }

    /// Keeps the points for which `keep` returns true, preserving order.
    pub fn retain_points(&mut self, mut keep: impl FnMut(&RadarPoint) -> bool) {
        let mut sources = self.sources.iter();
        let mut kept_sources = Vec::with_capacity(self.sources.len());
        self.points.retain(|p| {
            let tag = *sources.next().expect("tag per point");
            let k = keep(p);
            if k {
                kept_sources.push(tag);
            }
            k
        });
        self.sources = kept_sources;
    }

    pub fn into_points(self) -> Vec<RadarPoint> {
        self.points
    }
}
