mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::scene_path;

fn radar4d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radar4d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path) {
    let o = radar4d(&[
        "simulate",
        "--scene",
        s(&scene_path("two_ped.example")),
        "--out-frames",
        s(&dir.join("frames.jsonl")),
        "--out-poses",
        s(&dir.join("poses.jsonl")),
        "--out-truth",
        s(&dir.join("truth.jsonl")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn empty_frames_give_empty_log() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    std::fs::write(&frames, "").unwrap();
    let out = dir.path().join("det.jsonl");
    let o = radar4d(&["detect", "--frames", s(&frames), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn missing_scene_fails() {
    let o = radar4d(&["simulate", "--scene", "/nonexistent/scene.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error"));
}

#[test]
fn invalid_scene_fails() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.toml");
    std::fs::write(
        &scene,
        "duration = 1.0\nframe_rate = 0.0\n[ego]\nwaypoints = [[0.0, 0.0, 1.0]]\n",
    )
    .unwrap();
    let o = radar4d(&[
        "simulate",
        "--scene",
        s(&scene),
        "--out-frames",
        s(&dir.path().join("f")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("frame_rate"));
}

#[test]
fn malformed_frame_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    std::fs::write(
        &frames,
        "{\"t\":0.0,\"points\":[]}\n{\"t\":0.1,\"points\":[[1,2]]}\n",
    )
    .unwrap();
    let o = radar4d(&["detect", "--frames", s(&frames)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn out_of_order_frames_fail() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    std::fs::write(
        &frames,
        "{\"t\":1.0,\"points\":[]}\n{\"t\":0.5,\"points\":[]}\n",
    )
    .unwrap();
    let o = radar4d(&["detect", "--frames", s(&frames)]);
    assert!(!o.status.success());
}

#[test]
fn detect_then_evaluate_and_misalignment() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let det = dir.path().join("det.jsonl");
    let dump = dir.path().join("clusters.jsonl");
    let o = radar4d(&[
        "detect",
        "--frames",
        s(&dir.path().join("frames.jsonl")),
        "--poses",
        s(&dir.path().join("poses.jsonl")),
        "--profile",
        "indoor",
        "--out",
        s(&det),
        "--dump-clusters",
        s(&dump),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = std::fs::read_to_string(&det).unwrap();
    assert_eq!(log.lines().count(), 160);
    assert!(log.lines().all(|l| l.contains("\"degraded\":false")));
    let dumped = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(dumped.lines().count(), 160);
    let first: serde_json::Value = serde_json::from_str(dumped.lines().nth(5).unwrap()).unwrap();
    assert!(first["clusters"].as_array().is_some_and(|c| !c.is_empty()));

    let report = dir.path().join("report.txt");
    let o = radar4d(&[
        "evaluate",
        "--detections",
        s(&det),
        "--truth",
        s(&dir.path().join("truth.jsonl")),
        "--report",
        s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let human = String::from_utf8_lossy(&o.stdout);
    assert!(human.contains("Frame-wise recall:"));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("frames=160"));
    assert!(text.lines().any(|l| l.starts_with("frame_recall=")));

    // Drop the first detection line so the streams no longer line up.
    let shifted = dir.path().join("shifted.jsonl");
    std::fs::write(
        &shifted,
        log.lines()
            .skip(1)
            .map(|l| format!("{l}\n"))
            .collect::<String>(),
    )
    .unwrap();
    let o = radar4d(&[
        "evaluate",
        "--detections",
        s(&shifted),
        "--truth",
        s(&dir.path().join("truth.jsonl")),
    ]);
    assert!(!o.status.success());
}

#[test]
fn missing_poses_run_degraded_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let det = dir.path().join("det.jsonl");
    let o = radar4d(&[
        "detect",
        "--frames",
        s(&dir.path().join("frames.jsonl")),
        "--out",
        s(&det),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).to_lowercase().contains("warn"));
    let log = std::fs::read_to_string(&det).unwrap();
    assert!(log.lines().all(|l| l.contains("\"degraded\":true")));
}

#[test]
fn evaluate_constructed_logs() {
    let dir = tempfile::tempdir().unwrap();
    let (det, truth) = (dir.path().join("det.jsonl"), dir.path().join("truth.jsonl"));
    let ped = r#"{"type":"pedestrian","motion":"dynamic","heading":"approaching","centroid":[5.0,0.0,1.0],"extent":[0.5,0.7,1.5],"mean_doppler":1.0,"comp_mean_doppler":1.0,"modal_rcs":2.5,"points":9}"#;
    let lat = r#"{"filter":1,"accumulate":1,"cluster":1,"describe":1,"classify":1,"total":5}"#;
    let obj = |id: u32| {
        format!(
            r#"{{"id":{id},"class":"pedestrian","centroid":[5.0,0.0,1.0],"velocity":[-1.0,0.0,0.0],"visible":true}}"#
        )
    };
    let (mut d, mut t) = (String::new(), String::new());
    for k in 0..160 {
        let time = f64::from(k) / 15.0;
        let found = if k < 150 {
            [ped; 2].join(",")
        } else {
            String::new()
        };
        d += &format!(
            "{{\"t\":{time},\"detections\":[{found}],\"degraded\":false,\"latency_us\":{lat}}}\n"
        );
        t += &format!("{{\"t\":{time},\"objects\":[{},{}]}}\n", obj(0), obj(1));
    }
    std::fs::write(&det, d).unwrap();
    std::fs::write(&truth, t).unwrap();
    let report = dir.path().join("r.txt");
    let o = radar4d(&[
        "evaluate",
        "--detections",
        s(&det),
        "--truth",
        s(&truth),
        "--report",
        s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("frame_recall=0.9375"), "{text}");
    assert!(text.contains("person_count_recall=0.9375"));
    assert!(text.contains("false_alarm_rate=0"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("93.75% (94%)"));
}

#[test]
fn bench_with_no_points_succeeds() {
    let o = radar4d(&["bench", "--points", "0", "--frames", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("p99 total"));
    assert!(out.contains("N=8000"));
}

#[test]
fn filter_subcommand_keeps_only_passing_points() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    std::fs::write(
        &frames,
        "{\"t\":0.0,\"points\":[[10,0,0,1,20,0],[10,0,0,1,50,0],[10,5,0,1,20,0],[0,0,0,0,20,0]]}\n",
    )
    .unwrap();
    let out = dir.path().join("kept.jsonl");
    let o = radar4d(&[
        "filter",
        "--frames",
        s(&frames),
        "--profile",
        "indoor",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "{\"t\":0.0,\"points\":[[10.0,0.0,0.0,1.0,20.0,0.0]]}\n"
    );
    assert!(stderr(&o).contains("rcs=1 angular=2 doppler=0"));

    let o = radar4d(&["filter", "--frames", s(&frames), "--profile", "tunnel"]);
    assert!(!o.status.success());
}

#[test]
fn config_file_overrides_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    std::fs::write(&frames, "{\"t\":0.0,\"points\":[[10,0,0,1,50,0]]}\n").unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "active_profile = \"indoor\"\n[profile.indoor]\nrcs_max = 60.0\n",
    )
    .unwrap();
    let out = dir.path().join("kept.jsonl");
    let o = radar4d(&[
        "filter",
        "--frames",
        s(&frames),
        "--config",
        s(&cfg),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out).unwrap().contains("50.0"));

    std::fs::write(&cfg, "[clustering]\nd_threshold = 0.6\n").unwrap();
    let o = radar4d(&["filter", "--frames", s(&frames), "--config", s(&cfg)]);
    assert!(!o.status.success());
}

#[test]
fn realtime_pacing_runs() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.jsonl");
    let text: String = (0..5)
        .map(|k| format!("{{\"t\":{},\"points\":[]}}\n", f64::from(k) / 15.0))
        .collect();
    std::fs::write(&frames, text).unwrap();
    let start = std::time::Instant::now();
    let o = radar4d(&[
        "detect",
        "--frames",
        s(&frames),
        "--realtime",
        "--rate",
        "50",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() >= 4.0 / 50.0);
    assert!(stderr(&o).contains("missed their deadline"));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 5);
}
