use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use radar4d::bench;
use radar4d::evaluation::{count_pedestrians, MetricsReport};
use radar4d::filtering::filter_frame;
use radar4d::io::config::{ConfigFile, RunConfig};
use radar4d::io::records::{self, DetectionRecord, FrameRecord};
use radar4d::io::{create, open, write_jsonl_line};
use radar4d::pipeline::ClusterDump;
use radar4d::simulator::{generate_scene, write_scene, SceneConfig, SceneFiles};
use radar4d::{Pipeline, PointSource, StampedPose};

#[derive(Parser)]
#[command(version, about = "Radar-only 4D mmWave perception pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over a recorded frame stream.
    Detect {
        #[arg(long)]
        frames: PathBuf,
        /// Odometry stream; without it every frame runs in degraded mode.
        #[arg(long)]
        poses: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Filter profile, overriding the config file.
        #[arg(long)]
        profile: Option<String>,
        /// Detection log; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pace frames in wall-clock time and report deadline misses.
        #[arg(long)]
        realtime: bool,
        /// Pacing rate for --realtime instead of the recorded timestamps.
        #[arg(long)]
        rate: Option<f64>,
        /// Write per-frame accumulated points and cluster membership here.
        #[arg(long)]
        dump_clusters: Option<PathBuf>,
    },
    /// Generate a synthetic scene with ground truth.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        /// Overrides the seed in the scene file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "frames.jsonl")]
        out_frames: PathBuf,
        #[arg(long, default_value = "poses.jsonl")]
        out_poses: PathBuf,
        #[arg(long, default_value = "truth.jsonl")]
        out_truth: PathBuf,
    },
    /// Score a detection log against ground truth.
    Evaluate {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time every stage on synthetic frames.
    Bench {
        #[arg(long, default_value_t = 6000)]
        points: usize,
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Apply the point filter alone and write the surviving points.
    Filter {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>, profile: Option<&str>) -> Result<RunConfig> {
    let file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    Ok(file.resolve(profile)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct DumpRecord<'a> {
    t: f64,
    /// `[x, y, z, doppler, rcs, from_previous]`
    points: Vec<[f64; 6]>,
    clusters: &'a [ClusterDump],
}

#[allow(clippy::too_many_arguments)]
fn detect(
    frames: &Path,
    poses: Option<&Path>,
    config: Option<&Path>,
    profile: Option<&str>,
    out: Option<&Path>,
    realtime: bool,
    rate: Option<f64>,
    dump: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(config, profile)?;
    info!("profile {}: {:?}", cfg.profile_name, cfg.pipeline.profile);
    let frames = records::read_frames(open(frames)?)
        .with_context(|| format!("reading {}", frames.display()))?;
    let poses: Vec<StampedPose> = match poses {
        Some(p) => {
            records::read_poses(open(p)?).with_context(|| format!("reading {}", p.display()))?
        }
        None => {
            warn!("no pose stream given; running without ego-motion compensation");
            Vec::new()
        }
    };
    if let Some(r) = rate {
        if !(r.is_finite() && r > 0.0) {
            bail!("--rate must be positive, got {r}");
        }
    }

    let mut pipeline = Pipeline::new(cfg.pipeline)?.with_cluster_dump(dump.is_some());
    let mut buffer = cfg.pose_buffer();
    let lookahead = cfg.velocity_window / 2.0;
    let mut next_pose = 0;
    let mut out = output(out)?;
    let mut dump_out = dump.map(|p| create(p).map(BufWriter::new)).transpose()?;

    let start = Instant::now();
    let t0 = frames.first().map_or(0.0, |f| f.timestamp);
    let mut degraded = 0usize;
    let mut misses = 0usize;

    for (k, frame) in frames.iter().enumerate() {
        while next_pose < poses.len() && poses[next_pose].timestamp <= frame.timestamp + lookahead {
            buffer.push(poses[next_pose])?;
            next_pose += 1;
        }
        let offset = match rate {
            Some(r) => k as f64 / r,
            None => frame.timestamp - t0,
        };
        let period = match rate {
            Some(r) => 1.0 / r,
            None => frames
                .get(k + 1)
                .map_or(f64::INFINITY, |n| n.timestamp - frame.timestamp),
        };
        if realtime {
            let release = start + Duration::from_secs_f64(offset.max(0.0));
            if let Some(wait) = release.checked_duration_since(Instant::now()) {
                thread::sleep(wait);
            }
        }

        let result = pipeline
            .process_frame(frame, &buffer)
            .with_context(|| format!("frame {} (t = {})", k + 1, frame.timestamp))?;
        if result.degraded {
            degraded += 1;
        }
        if realtime && start.elapsed().as_secs_f64() > offset + period {
            misses += 1;
            warn!(
                "frame {} at t = {} missed its deadline",
                k + 1,
                frame.timestamp
            );
        }
        write_jsonl_line(&mut out, &DetectionRecord::from(&result))?;
        if let (Some(w), Some(acc), Some(clusters)) =
            (dump_out.as_mut(), &result.accumulated, &result.clusters)
        {
            let points = acc
                .iter_tagged()
                .map(|(p, s)| {
                    let prev = if s == PointSource::AccumulatedPrevious {
                        1.0
                    } else {
                        0.0
                    };
                    [p.x, p.y, p.z, p.doppler, p.rcs, prev]
                })
                .collect();
            write_jsonl_line(
                &mut *w,
                &DumpRecord {
                    t: result.timestamp,
                    points,
                    clusters,
                },
            )?;
        }
    }
    out.flush()?;
    if let Some(mut w) = dump_out {
        w.flush()?;
    }
    if degraded > 0 {
        warn!(
            "{degraded} of {} frames processed without valid odometry",
            frames.len()
        );
    }
    if realtime {
        eprintln!(
            "realtime: {misses} of {} frames missed their deadline",
            frames.len()
        );
    }
    Ok(())
}

fn simulate(
    scene: &Path,
    seed: Option<u64>,
    frames: &Path,
    poses: &Path,
    truth: &Path,
) -> Result<()> {
    let mut cfg = SceneConfig::load(scene)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scene = generate_scene(&cfg)?;
    write_scene(&SceneFiles::from(scene), frames, poses, truth)?;
    info!("wrote {} frames", cfg.frame_count());
    Ok(())
}

fn evaluate(detections: &Path, truth: &Path, report: Option<&Path>) -> Result<()> {
    let det = records::read_detections(open(detections)?)
        .with_context(|| format!("reading {}", detections.display()))?;
    let gt = records::read_truth(open(truth)?)
        .with_context(|| format!("reading {}", truth.display()))?;
    let series = count_pedestrians(&det, &gt)?;
    let metrics = MetricsReport::compute(&series);
    print!("{}", metrics.render_human());
    if let Some(p) = report {
        std::fs::write(p, metrics.render_report())
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run_bench(points: usize, frames: usize, seed: u64, config: Option<&Path>) -> Result<()> {
    let cfg = load_config(config, None)?;
    let report = bench::run_bench(cfg.pipeline, points, frames, seed)?;
    print!("{}", report.render());
    Ok(())
}

fn filter(
    frames: &Path,
    config: Option<&Path>,
    profile: Option<&str>,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(config, profile)?;
    let frames = records::read_frames(open(frames)?)
        .with_context(|| format!("reading {}", frames.display()))?;
    let mut out = output(out)?;
    let (mut kept, mut rejected) = (0usize, radar4d::filtering::RejectionStats::default());
    for f in &frames {
        let (passed, stats) = filter_frame(&cfg.pipeline.profile, f);
        kept += passed.len();
        rejected.rcs += stats.rcs;
        rejected.angular += stats.angular;
        rejected.doppler += stats.doppler;
        write_jsonl_line(&mut out, &FrameRecord::from(&passed))?;
    }
    out.flush()?;
    eprintln!(
        "kept {kept} points; rejected rcs={} angular={} doppler={}",
        rejected.rcs, rejected.angular, rejected.doppler
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect {
            frames,
            poses,
            config,
            profile,
            out,
            realtime,
            rate,
            dump_clusters,
        } => detect(
            frames,
            poses.as_deref(),
            config.as_deref(),
            profile.as_deref(),
            out.as_deref(),
            *realtime,
            *rate,
            dump_clusters.as_deref(),
        ),
        Command::Simulate {
            scene,
            seed,
            out_frames,
            out_poses,
            out_truth,
        } => simulate(scene, *seed, out_frames, out_poses, out_truth),
        Command::Evaluate {
            detections,
            truth,
            report,
        } => evaluate(detections, truth, report.as_deref()),
        Command::Bench {
            points,
            frames,
            seed,
            config,
        } => run_bench(*points, *frames, *seed, config.as_deref()),
        Command::Filter {
            frames,
            config,
            profile,
            out,
        } => filter(
            frames,
            config.as_deref(),
            profile.as_deref(),
            out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
