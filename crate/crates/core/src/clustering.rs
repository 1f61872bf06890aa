//! Stage 3: Euclidean clustering over the accumulated cloud, per-cluster
//! descriptors and the Doppler/RCS retention test.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::ego_motion::EgoState;
use crate::error::{Error, Result};
use crate::filtering::FilterProfile;
use crate::geometry::los_unit_vector;
use crate::spatial::{Remaining, SpatialIndex};
use crate::types::RadarPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    /// Link distance in meters; points strictly closer than this are joined.
    pub d_th: f64,
    pub min_points: usize,
    pub rcs_bin_width: f64,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            d_th: 0.6,
            min_points: 3,
            rcs_bin_width: 1.0,
        }
    }
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_th > 0.0 && self.d_th.is_finite()) {
            return Err(Error::Config(format!(
                "clustering.d_th must be > 0, got {}",
                self.d_th
            )));
        }
        if self.min_points < 1 {
            return Err(Error::Config("clustering.min_points must be >= 1".into()));
        }
        if !(self.rcs_bin_width > 0.0 && self.rcs_bin_width.is_finite()) {
            return Err(Error::Config(format!(
                "clustering.rcs_bin_width must be > 0, got {}",
                self.rcs_bin_width
            )));
        }
        Ok(())
    }
}

/// One connected component of the radius graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Ascending indices into the clustered point slice.
    pub members: Vec<usize>,
    pub points: Vec<RadarPoint>,
}

impl Cluster {
    pub fn from_points(points: Vec<RadarPoint>) -> Self {
        Self {
            members: (0..points.len()).collect(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn build_spatial_index(points: &[RadarPoint]) -> SpatialIndex {
    let positions: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
    SpatialIndex::build(&positions)
}

/// Connected components of the graph joining points closer than `d_th`.
///
/// Components smaller than `min_points` are dropped. Clusters come back
/// ordered by their smallest member index, members ascending.
pub fn euclidean_cluster(points: &[RadarPoint], params: &ClusteringParams) -> Vec<Cluster> {
    let index = build_spatial_index(points);
    let mut remaining = Remaining::new(&index);
    let d2_max = params.d_th * params.d_th;
    let mut clusters = Vec::new();
    let mut queue = Vec::new();

    for seed in 0..points.len() {
        if !remaining.remove(seed) {
            continue;
        }
        queue.clear();
        queue.push(seed);
        let mut members = Vec::new();
        while let Some(i) = queue.pop() {
            members.push(i);
            let p = &points[i];
            remaining.take_within([p.x, p.y, p.z], params.d_th, |d2| d2 < d2_max, &mut queue);
        }
        if members.len() >= params.min_points {
            members.sort_unstable();
            let pts = members.iter().map(|&i| points[i]).collect();
            clusters.push(Cluster {
                members,
                points: pts,
            });
        }
    }
    clusters
}

pub fn mean_doppler(c: &Cluster) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyCluster);
    }
    Ok(c.points.iter().map(|p| p.doppler).sum::<f64>() / c.len() as f64)
}

/// Mean of `doppler − v_ego · r̂` over members with a usable direction.
pub fn compensated_mean_doppler(c: &Cluster, ego: &EgoState) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for p in &c.points {
        if let Ok(r) = los_unit_vector(p) {
            sum += p.doppler - ego.velocity.dot(&r);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyCluster);
    }
    Ok(sum / n as f64)
}

/// Centre of the most populated RCS bin `[k·w, (k+1)·w)`; ties go to the
/// lower bin.
pub fn modal_rcs(c: &Cluster, bin_width: f64) -> Result<f64> {
    let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
    for p in &c.points {
        *bins.entry((p.rcs / bin_width).floor() as i64).or_default() += 1;
    }
    // BTreeMap iterates ascending, and max_by_key keeps the last maximum, so
    // walk it backwards to land on the lowest of tied bins.
    let (bin, _) = bins
        .iter()
        .rev()
        .max_by_key(|(_, &count)| count)
        .ok_or(Error::EmptyCluster)?;
    Ok((*bin as f64 + 0.5) * bin_width)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterDescriptors {
    pub mean_doppler: f64,
    pub comp_mean_doppler: f64,
    pub modal_rcs: f64,
    pub centroid: [f64; 3],
    pub point_count: usize,
}

pub fn centroid(c: &Cluster) -> Result<Vector3<f64>> {
    if c.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let sum: Vector3<f64> = c.points.iter().map(|p| p.position()).sum();
    Ok(sum / c.len() as f64)
}

pub fn describe(
    c: &Cluster,
    ego: &EgoState,
    params: &ClusteringParams,
) -> Result<ClusterDescriptors> {
    let centroid = centroid(c)?;
    Ok(ClusterDescriptors {
        mean_doppler: mean_doppler(c)?,
        comp_mean_doppler: compensated_mean_doppler(c, ego)?,
        modal_rcs: modal_rcs(c, params.rcs_bin_width)?,
        centroid: [centroid.x, centroid.y, centroid.z],
        point_count: c.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionRules {
    pub v_min_retain: f64,
    pub rcs_retain_min: f64,
    pub rcs_retain_max: f64,
}

pub const DEFAULT_V_MIN_RETAIN: f64 = 0.25;

impl RetentionRules {
    /// Default rules with the RCS window taken from the filter profile.
    pub fn from_profile(profile: &FilterProfile) -> Self {
        Self {
            v_min_retain: DEFAULT_V_MIN_RETAIN,
            rcs_retain_min: profile.rcs_min,
            rcs_retain_max: profile.rcs_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_min_retain >= 0.0) {
            return Err(Error::Config("retention.v_min must be >= 0".into()));
        }
        if !(self.rcs_retain_min < self.rcs_retain_max) {
            return Err(Error::Config(format!(
                "retention RCS window must satisfy min < max, got [{}, {}]",
                self.rcs_retain_min, self.rcs_retain_max
            )));
        }
        Ok(())
    }

    pub fn keeps(&self, d: &ClusterDescriptors) -> bool {
        d.comp_mean_doppler.abs() > self.v_min_retain
            || (self.rcs_retain_min..=self.rcs_retain_max).contains(&d.modal_rcs)
    }
}

/// Keeps clusters that move (compensated Doppler above threshold) or whose
/// modal RCS lies in the retention window. Order is preserved.
pub fn retain_clusters(
    clusters: Vec<Cluster>,
    descriptors: Vec<ClusterDescriptors>,
    rules: &RetentionRules,
) -> Vec<(Cluster, ClusterDescriptors)> {
    assert_eq!(
        clusters.len(),
        descriptors.len(),
        "one descriptor per cluster"
    );
    clusters
        .into_iter()
        .zip(descriptors)
        .filter(|(_, d)| rules.keeps(d))
        .collect()
}
