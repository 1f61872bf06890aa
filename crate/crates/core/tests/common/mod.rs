//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use radar4d::filtering::FilterProfile;
use radar4d::RadarPoint;
use rand::Rng;

/// Connected components of `d < d_th` by brute-force pairwise union-find,
/// keeping components with at least `min_points` members.
pub fn union_find_partition(
    points: &[RadarPoint],
    d_th: f64,
    min_points: usize,
) -> BTreeSet<BTreeSet<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&points[i], &points[j]);
            let d2 = (a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2);
            if d2 < d_th * d_th {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(i);
    }
    groups
        .into_values()
        .filter(|g| g.len() >= min_points)
        .collect()
}

/// Azimuth and elevation in degrees from first principles.
pub fn angles_deg(p: &RadarPoint) -> (f64, f64) {
    let horizontal = p.x.hypot(p.y);
    (
        p.y.atan2(p.x).to_degrees(),
        p.z.atan2(horizontal).to_degrees(),
    )
}

/// Direct transcription of the keep rule: RCS strictly inside its bounds,
/// angles and Doppler inclusive, points at the origin rejected.
pub fn naive_keep(profile: &FilterProfile, p: &RadarPoint) -> bool {
    if (p.x * p.x + p.y * p.y + p.z * p.z).sqrt() < 1e-9 {
        return false;
    }
    let (az, el) = angles_deg(p);
    p.rcs > profile.rcs_min
        && p.rcs < profile.rcs_max
        && az >= profile.az_min
        && az <= profile.az_max
        && el >= profile.el_min
        && el <= profile.el_max
        && p.doppler >= profile.v_min
        && p.doppler <= profile.v_max
}

/// Points scattered around and across the profile's bounds.
pub fn random_point_near(profile: &FilterProfile, rng: &mut impl Rng) -> RadarPoint {
    let range = rng.random_range(0.5..30.0);
    let spread = |rng: &mut _, lo: f64, hi: f64| {
        let pad = 0.3 * (hi - lo);
        Rng::random_range(rng, lo - pad..hi + pad)
    };
    let az = spread(rng, profile.az_min, profile.az_max).to_radians();
    let el = spread(rng, profile.el_min, profile.el_max).to_radians();
    RadarPoint::new(
        range * el.cos() * az.cos(),
        range * el.cos() * az.sin(),
        range * el.sin(),
        spread(rng, profile.v_min, profile.v_max),
        spread(rng, profile.rcs_min, profile.rcs_max),
        false,
    )
}

pub fn scene_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenes")
        .join(name)
}

/// Streams frames through a pipeline the way `detect` does, handing each
/// frame only the poses recorded up to half a velocity window past it.
pub fn run_stream(
    run: &radar4d::io::config::RunConfig,
    frames: &[radar4d::RadarFrame],
    poses: &[radar4d::StampedPose],
    dump: bool,
) -> Vec<radar4d::FrameResult> {
    let mut pipeline = radar4d::Pipeline::new(run.pipeline)
        .unwrap()
        .with_cluster_dump(dump);
    let mut buffer = run.pose_buffer();
    let mut next = 0;
    frames
        .iter()
        .map(|f| {
            while next < poses.len()
                && poses[next].timestamp <= f.timestamp + run.velocity_window / 2.0
            {
                buffer.push(poses[next]).unwrap();
                next += 1;
            }
            pipeline.process_frame(f, &buffer).unwrap()
        })
        .collect()
}
