//! Latency measurement on synthetic load.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::{euclidean_cluster, ClusteringParams};
use crate::ego_motion::PoseBuffer;
use crate::error::Result;
use crate::filtering::FilterProfile;
use crate::geometry::StampedPose;
use crate::pipeline::{Pipeline, PipelineConfig, StageLatencies};
use crate::types::{RadarFrame, RadarPoint};

/// One frame period at 15 Hz, in microseconds.
pub const FRAME_BUDGET_US: f64 = 1e6 / 15.0;

pub const SCALING_SIZES: [usize; 3] = [2000, 4000, 8000];

/// Point density of the scaling data, points per cubic meter.
pub const SCALING_DENSITY: f64 = 1.0;

/// Height of the slab holding the scaling data, meters.
pub const SCALING_HEIGHT: f64 = 4.0;

/// A slab of height [`SCALING_HEIGHT`] whose square footprint holds `n`
/// points at [`SCALING_DENSITY`], so every size has the same expected
/// neighbor count per point.
pub fn scaling_box(n: usize) -> [f64; 3] {
    let side = (n as f64 / (SCALING_DENSITY * SCALING_HEIGHT)).sqrt();
    [side, side, SCALING_HEIGHT]
}

/// Frames of `n` points spread uniformly over the field of view of
/// `profile` out to 30 m, all of which pass the filter.
pub fn synthetic_frames(
    profile: &FilterProfile,
    n: usize,
    frames: usize,
    seed: u64,
    rate: f64,
) -> Vec<RadarFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|k| {
            let points = (0..n)
                .map(|_| {
                    let range: f64 = rng.random_range(1.0..30.0);
                    let az = rng
                        .random_range(profile.az_min..=profile.az_max)
                        .to_radians();
                    let el = rng
                        .random_range(profile.el_min..=profile.el_max)
                        .to_radians();
                    let rcs = rng.random_range(profile.rcs_min + 0.1..profile.rcs_max - 0.1);
                    let doppler = rng.random_range(profile.v_min..=profile.v_max) * 0.25;
                    RadarPoint::new(
                        range * el.cos() * az.cos(),
                        range * el.cos() * az.sin(),
                        range * el.sin(),
                        doppler,
                        rcs,
                        false,
                    )
                })
                .collect();
            RadarFrame::new(k as f64 / rate, points)
        })
        .collect()
}

/// Uniform points in an axis-aligned box anchored at the origin.
pub fn uniform_box(n: usize, size: [f64; 3], rng: &mut impl Rng) -> Vec<RadarPoint> {
    (0..n)
        .map(|_| {
            RadarPoint::at(
                rng.random_range(0.0..size[0]),
                rng.random_range(0.0..size[1]),
                rng.random_range(0.0..size[2]),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub p50: f64,
    pub p99: f64,
    pub max: f64,
}

impl Summary {
    /// Nearest-rank percentiles. `None` for an empty sample.
    pub fn of(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Some(Self {
            mean: s.iter().sum::<f64>() / s.len() as f64,
            p50: rank(0.50),
            p99: rank(0.99),
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageSummaries {
    pub filter: Summary,
    pub accumulate: Summary,
    pub cluster: Summary,
    pub describe: Summary,
    pub classify: Summary,
    pub total: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub points: usize,
    /// Median clustering time in microseconds.
    pub median_us: f64,
    /// Time relative to the previous row.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub points: usize,
    pub frames: usize,
    /// Statistics over every frame except the first, which has nothing to
    /// accumulate.
    pub stages: StageSummaries,
    pub scaling: Vec<ScalingRow>,
}

impl BenchReport {
    pub fn within_budget(&self) -> bool {
        self.stages.total.p99 < FRAME_BUDGET_US
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "bench: {} frames x {} points (latency in us)\n",
            self.frames, self.points
        );
        out += &format!(
            "{:<12}{:>12}{:>12}{:>12}{:>12}\n",
            "stage", "mean", "p50", "p99", "max"
        );
        let s = &self.stages;
        for (name, v) in [
            ("filter", s.filter),
            ("accumulate", s.accumulate),
            ("cluster", s.cluster),
            ("describe", s.describe),
            ("classify", s.classify),
            ("total", s.total),
        ] {
            out += &format!(
                "{name:<12}{:>12.1}{:>12.1}{:>12.1}{:>12.1}\n",
                v.mean, v.p50, v.p99, v.max
            );
        }
        out += &format!(
            "p99 total {:.1} us {} budget {:.0} us\n",
            s.total.p99,
            if self.within_budget() { "<" } else { ">=" },
            FRAME_BUDGET_US
        );
        out += &format!("clustering scaling (uniform, {SCALING_DENSITY} points/m^3)\n");
        for row in &self.scaling {
            match row.ratio {
                Some(r) => {
                    out += &format!(
                        "  N={:<6} {:>10.1} us  x{r:.2}\n",
                        row.points, row.median_us
                    )
                }
                None => out += &format!("  N={:<6} {:>10.1} us\n", row.points, row.median_us),
            }
        }
        out
    }
}

/// Runs `frames` synthetic frames of `n` points through a full pipeline on
/// a static platform and collects per-stage latencies.
pub fn run_pipeline_bench(
    config: PipelineConfig,
    n: usize,
    frames: usize,
    seed: u64,
) -> Result<(StageSummaries, Vec<StageLatencies>)> {
    let rate = 15.0;
    let data = synthetic_frames(&config.profile, n, frames.max(2), seed, rate);
    let mut poses = PoseBuffer::new(1024);
    let end = data.last().map_or(0.0, |f| f.timestamp) + 0.2;
    let mut t = 0.0;
    while t <= end {
        poses.push(StampedPose::identity(t))?;
        t += 0.01;
    }
    let mut pipeline = Pipeline::new(config)?;
    let mut lat = Vec::with_capacity(data.len());
    for f in &data {
        lat.push(pipeline.process_frame(f, &poses)?.stage_latencies);
    }
    let steady = &lat[1..];
    let pick = |g: fn(&StageLatencies) -> u64| {
        let v: Vec<f64> = steady.iter().map(|l| g(l) as f64).collect();
        Summary::of(&v).expect("at least one steady frame")
    };
    let stages = StageSummaries {
        filter: pick(|l| l.filter),
        accumulate: pick(|l| l.accumulate),
        cluster: pick(|l| l.cluster),
        describe: pick(|l| l.describe),
        classify: pick(|l| l.classify),
        total: pick(|l| l.total),
    };
    Ok((stages, lat))
}

/// Median clustering time for each size on uniform random data in
/// [`scaling_box`].
pub fn clustering_scaling(
    sizes: &[usize],
    repeats: usize,
    seed: u64,
    params: &ClusteringParams,
) -> Vec<ScalingRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut times: Vec<f64> = (0..repeats.max(1))
            .map(|_| {
                let pts = uniform_box(n, scaling_box(n), &mut rng);
                let start = Instant::now();
                std::hint::black_box(euclidean_cluster(&pts, params));
                start.elapsed().as_secs_f64() * 1e6
            })
            .collect();
        times.sort_by(f64::total_cmp);
        let median_us = times[times.len() / 2];
        let ratio = rows.last().map(|r| median_us / r.median_us);
        rows.push(ScalingRow {
            points: n,
            median_us,
            ratio,
        });
    }
    rows
}

pub fn run_bench(
    config: PipelineConfig,
    n: usize,
    frames: usize,
    seed: u64,
) -> Result<BenchReport> {
    let (stages, _) = run_pipeline_bench(config, n, frames, seed)?;
    let scaling = clustering_scaling(&SCALING_SIZES, 15, seed, &config.clustering);
    Ok(BenchReport {
        points: n,
        frames: frames.max(2),
        stages,
        scaling,
    })
}
