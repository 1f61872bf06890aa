//! Stage 1: multi-threshold rejection of implausible detections.
//!
//! A point survives when its RCS lies strictly inside the RCS window, its
//! azimuth and elevation lie inside the angular window (inclusive), and its
//! Doppler lies inside the plausibility window (inclusive).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::spherical_angles;
use crate::types::{RadarFrame, RadarPoint};

/// Threshold set for one operating environment. Angles in degrees,
/// velocities in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterProfile {
    pub rcs_min: f64,
    pub rcs_max: f64,
    pub az_min: f64,
    pub az_max: f64,
    pub el_min: f64,
    pub el_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

pub const DEFAULT_DOPPLER_BOUND: f64 = 10.0;

impl FilterProfile {
    /// Tight angular and RCS limits for enclosed spaces with strong multipath.
    pub fn indoor() -> Self {
        Self {
            rcs_min: 0.0,
            rcs_max: 45.0,
            az_min: -5.0,
            az_max: 5.0,
            el_min: -2.0,
            el_max: 8.0,
            v_min: -DEFAULT_DOPPLER_BOUND,
            v_max: DEFAULT_DOPPLER_BOUND,
        }
    }

    /// Wider limits for long-range, open environments.
    pub fn outdoor() -> Self {
        Self {
            rcs_min: -5.0,
            rcs_max: 55.0,
            az_min: -15.0,
            az_max: 15.0,
            el_min: -6.0,
            el_max: 12.0,
            v_min: -DEFAULT_DOPPLER_BOUND,
            v_max: DEFAULT_DOPPLER_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("rcs", self.rcs_min, self.rcs_max),
            ("azimuth", self.az_min, self.az_max),
            ("elevation", self.el_min, self.el_max),
            ("doppler", self.v_min, self.v_max),
        ];
        for (name, lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "{name} bounds must satisfy min < max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Looks up one of the shipped profiles by name.
pub fn builtin_profile(name: &str) -> Result<FilterProfile> {
    match name {
        "indoor" => Ok(FilterProfile::indoor()),
        "outdoor" => Ok(FilterProfile::outdoor()),
        other => Err(Error::UnknownProfile(other.to_string())),
    }
}

/// The first criterion a point fails, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Rcs,
    Angular,
    Doppler,
}

pub fn first_rejection(profile: &FilterProfile, p: &RadarPoint) -> Option<Rejection> {
    if !(profile.rcs_min < p.rcs && p.rcs < profile.rcs_max) {
        return Some(Rejection::Rcs);
    }
    match spherical_angles(p) {
        Ok((az, el))
            if (profile.az_min..=profile.az_max).contains(&az)
                && (profile.el_min..=profile.el_max).contains(&el) => {}
        // A point at the origin has no direction and cannot be in the field of view.
        _ => return Some(Rejection::Angular),
    }
    if !(profile.v_min..=profile.v_max).contains(&p.doppler) {
        return Some(Rejection::Doppler);
    }
    None
}

pub fn point_passes(profile: &FilterProfile, p: &RadarPoint) -> bool {
    first_rejection(profile, p).is_none()
}

/// Per-criterion rejection counts for one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RejectionStats {
    pub rcs: usize,
    pub angular: usize,
    pub doppler: usize,
}

impl RejectionStats {
    pub fn total(&self) -> usize {
        self.rcs + self.angular + self.doppler
    }

    fn record(&mut self, r: Rejection) {
        match r {
            Rejection::Rcs => self.rcs += 1,
            Rejection::Angular => self.angular += 1,
            Rejection::Doppler => self.doppler += 1,
        }
    }
}

/// Single pass over the frame; kept points stay in their original order.
pub fn filter_frame(profile: &FilterProfile, frame: &RadarFrame) -> (RadarFrame, RejectionStats) {
    let mut stats = RejectionStats::default();
    let mut out = RadarFrame::empty(frame.timestamp);
    for (p, source) in frame.iter_tagged() {
        match first_rejection(profile, p) {
            None => out.push(*p, source),
            Some(r) => stats.record(r),
        }
    }
    (out, stats)
}
