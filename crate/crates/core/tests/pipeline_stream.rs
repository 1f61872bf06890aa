mod common;

use radar4d::classification::{Heading, MotionState, ObjectType};
use radar4d::io::config::RunConfig;
use radar4d::simulator::{
    generate_scene, ClutterField, EgoPath, PedestrianConfig, SceneConfig, WallConfig,
};

use common::run_stream;

/// Sensor driving down a corridor toward a wall at 1.5 m/s while a person
/// walks toward it from the far end.
fn drive_scene() -> SceneConfig {
    SceneConfig {
        duration: 4.0,
        frame_rate: 15.0,
        pose_rate: 100.0,
        seed: 9,
        clutter_rate: 30.0,
        ghost_rate: 50.0,
        doppler_noise: 0.05,
        reference_profile: "indoor".into(),
        clutter_rcs: [-5.0, 55.0],
        clutter_field: ClutterField::default(),
        ego: EgoPath {
            waypoints: vec![[0.0, 0.0, 0.6], [30.0, 0.0, 0.6]],
            speed: 1.5,
            yaw_deg: 0.0,
        },
        pedestrians: vec![PedestrianConfig {
            initial_position: [16.0, 0.0],
            waypoints: vec![[9.0, 0.0]],
            speed: 1.0,
            points_per_frame: [10, 16],
            spread: 0.2,
            height: 1.7,
            rcs: [2.0, 2.0],
        }],
        walls: vec![WallConfig {
            start: [25.0, -4.0],
            end: [25.0, 4.0],
            z_min: 0.0,
            z_max: 3.0,
            density: 4.0,
            rcs: [35.0, 5.0],
        }],
    }
}

#[test]
fn moving_platform_separates_walker_from_wall() {
    let scene = generate_scene(&drive_scene()).unwrap();
    let results = run_stream(&RunConfig::default(), &scene.frames, &scene.poses, false);
    assert!(results.iter().all(|r| !r.degraded));

    let mut walker_frames = 0;
    for r in &results {
        for d in &r.detections {
            let c = d.bbox.centroid;
            if c[0] > 20.0 - 1.5 * r.timestamp {
                // The wall: static once the 1.5 m/s platform motion is removed.
                assert_eq!(d.object_type, ObjectType::LargeObject);
                assert_eq!(d.motion, MotionState::Static, "{:?}", d.descriptors);
            }
            if d.object_type == ObjectType::Pedestrian {
                // Closing speed 2.5 m/s raw, 1.0 m/s after compensation.
                assert!(d.descriptors.mean_doppler > 2.0);
                assert!((d.descriptors.comp_mean_doppler - 1.0).abs() < 0.2);
                assert_eq!(d.heading, Heading::Approaching);
                walker_frames += 1;
            }
        }
    }
    assert!(
        walker_frames > results.len() / 2,
        "walker found in {walker_frames} frames"
    );
}

#[test]
fn without_poses_every_frame_is_degraded_and_platform_motion_leaks() {
    let scene = generate_scene(&drive_scene()).unwrap();
    let results = run_stream(&RunConfig::default(), &scene.frames, &[], false);
    assert!(results.iter().all(|r| r.degraded));
    // With no ego estimate the static wall reads as approaching at the platform speed.
    let leaked = results
        .iter()
        .flat_map(|r| &r.detections)
        .filter(|d| d.object_type == ObjectType::LargeObject)
        .any(|d| d.motion == MotionState::Dynamic && d.descriptors.comp_mean_doppler > 1.0);
    assert!(leaked);
}
