//! TOML configuration for the pipeline.
//!
//! ```toml
//! active_profile = "indoor"          # or "outdoor" or a custom [profile.<name>]
//! doppler_sign = "closing_positive"  # or "receding_positive"
//!
//! [profile.indoor]                   # partial override of a shipped profile
//! az_min = -6.0
//!
//! [profile.corridor]                 # custom profiles must set every bound
//! rcs_min = 0.0
//! # ...
//!
//! [clustering]
//! d_th = 0.6
//!
//! [retention]
//! v_min_retain = 0.25                # rcs_retain_* default to the profile's RCS bounds
//!
//! [classifier]
//! ped_w_max = 1.0
//!
//! [ego_motion]
//! pose_capacity = 256
//! extrapolation_limit = 0.05
//! velocity_window = 0.2
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::classification::ClassifierRules;
use crate::clustering::{ClusteringParams, RetentionRules};
use crate::ego_motion::{
    PoseBuffer, DEFAULT_EXTRAPOLATION_LIMIT, DEFAULT_POSE_CAPACITY, DEFAULT_VELOCITY_WINDOW,
};
use crate::error::{Error, Result};
use crate::filtering::{builtin_profile, FilterProfile};
use crate::pipeline::{DopplerSign, PipelineConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub active_profile: Option<String>,
    pub doppler_sign: Option<DopplerSign>,
    #[serde(default)]
    pub profile: BTreeMap<String, ProfileOverrides>,
    #[serde(default)]
    pub clustering: ClusteringOverrides,
    #[serde(default)]
    pub retention: RetentionOverrides,
    #[serde(default)]
    pub classifier: ClassifierOverrides,
    #[serde(default)]
    pub ego_motion: EgoMotionOverrides,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverrides {
    pub rcs_min: Option<f64>,
    pub rcs_max: Option<f64>,
    pub az_min: Option<f64>,
    pub az_max: Option<f64>,
    pub el_min: Option<f64>,
    pub el_max: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringOverrides {
    pub d_th: Option<f64>,
    pub min_points: Option<usize>,
    pub rcs_bin_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionOverrides {
    pub v_min_retain: Option<f64>,
    pub rcs_retain_min: Option<f64>,
    pub rcs_retain_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierOverrides {
    pub ped_w_min: Option<f64>,
    pub ped_w_max: Option<f64>,
    pub ped_h_max: Option<f64>,
    pub ped_l_max: Option<f64>,
    pub ped_rcs_abs_max: Option<f64>,
    pub large_extent_min: Option<f64>,
    pub large_rcs_min: Option<f64>,
    pub v_static: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoMotionOverrides {
    pub pose_capacity: Option<usize>,
    pub extrapolation_limit: Option<f64>,
    pub velocity_window: Option<f64>,
}

/// Everything needed to run `detect`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile_name: String,
    pub pipeline: PipelineConfig,
    pub pose_capacity: usize,
    pub extrapolation_limit: f64,
    pub velocity_window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        ConfigFile::default()
            .resolve(None)
            .expect("built-in defaults are valid")
    }
}

impl RunConfig {
    pub fn pose_buffer(&self) -> PoseBuffer {
        PoseBuffer::new(self.pose_capacity)
            .with_extrapolation_limit(self.extrapolation_limit)
            .with_velocity_window(self.velocity_window)
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn profile(&self, name: &str) -> Result<FilterProfile> {
        let base = builtin_profile(name).ok();
        let Some(o) = self.profile.get(name) else {
            return base.ok_or_else(|| Error::UnknownProfile(name.to_string()));
        };
        let pick = |v: Option<f64>, d: Option<f64>, key: &str| {
            v.or(d)
                .ok_or_else(|| Error::Config(format!("profile.{name}.{key} is required")))
        };
        let b = base.as_ref();
        let p = FilterProfile {
            rcs_min: pick(o.rcs_min, b.map(|b| b.rcs_min), "rcs_min")?,
            rcs_max: pick(o.rcs_max, b.map(|b| b.rcs_max), "rcs_max")?,
            az_min: pick(o.az_min, b.map(|b| b.az_min), "az_min")?,
            az_max: pick(o.az_max, b.map(|b| b.az_max), "az_max")?,
            el_min: pick(o.el_min, b.map(|b| b.el_min), "el_min")?,
            el_max: pick(o.el_max, b.map(|b| b.el_max), "el_max")?,
            v_min: pick(o.v_min, b.map(|b| b.v_min), "v_min")?,
            v_max: pick(o.v_max, b.map(|b| b.v_max), "v_max")?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the run configuration. `profile_override` (from the command
    /// line) wins over `active_profile`; the default is `indoor`.
    pub fn resolve(&self, profile_override: Option<&str>) -> Result<RunConfig> {
        let name = profile_override
            .or(self.active_profile.as_deref())
            .unwrap_or("indoor")
            .to_string();
        let profile = self.profile(&name)?;

        let dc = ClusteringParams::default();
        let clustering = ClusteringParams {
            d_th: self.clustering.d_th.unwrap_or(dc.d_th),
            min_points: self.clustering.min_points.unwrap_or(dc.min_points),
            rcs_bin_width: self.clustering.rcs_bin_width.unwrap_or(dc.rcs_bin_width),
        };

        let dr = RetentionRules::from_profile(&profile);
        let retention = RetentionRules {
            v_min_retain: self.retention.v_min_retain.unwrap_or(dr.v_min_retain),
            rcs_retain_min: self.retention.rcs_retain_min.unwrap_or(dr.rcs_retain_min),
            rcs_retain_max: self.retention.rcs_retain_max.unwrap_or(dr.rcs_retain_max),
        };

        let dk = ClassifierRules::default();
        let c = &self.classifier;
        let classifier = ClassifierRules {
            ped_w_min: c.ped_w_min.unwrap_or(dk.ped_w_min),
            ped_w_max: c.ped_w_max.unwrap_or(dk.ped_w_max),
            ped_h_max: c.ped_h_max.unwrap_or(dk.ped_h_max),
            ped_l_max: c.ped_l_max.unwrap_or(dk.ped_l_max),
            ped_rcs_abs_max: c.ped_rcs_abs_max.unwrap_or(dk.ped_rcs_abs_max),
            large_extent_min: c.large_extent_min.unwrap_or(dk.large_extent_min),
            large_rcs_min: c.large_rcs_min.unwrap_or(dk.large_rcs_min),
            v_static: c.v_static.unwrap_or(dk.v_static),
        };

        let pipeline = PipelineConfig {
            profile,
            clustering,
            retention,
            classifier,
            doppler_sign: self.doppler_sign.unwrap_or_default(),
        };
        pipeline.validate()?;

        let e = &self.ego_motion;
        let run = RunConfig {
            profile_name: name,
            pipeline,
            pose_capacity: e.pose_capacity.unwrap_or(DEFAULT_POSE_CAPACITY),
            extrapolation_limit: e.extrapolation_limit.unwrap_or(DEFAULT_EXTRAPOLATION_LIMIT),
            velocity_window: e.velocity_window.unwrap_or(DEFAULT_VELOCITY_WINDOW),
        };
        if run.pose_capacity < 2 {
            return Err(Error::Config(
                "ego_motion.pose_capacity must be >= 2".into(),
            ));
        }
        if !(run.extrapolation_limit >= 0.0) || !(run.velocity_window > 0.0) {
            return Err(Error::Config(
                "ego_motion.extrapolation_limit must be >= 0 and velocity_window > 0".into(),
            ));
        }
        Ok(run)
    }
}
