//! Count-based detection metrics that need no spatial labels.

use std::fmt::Write as _;

use crate::classification::ObjectType;
use crate::error::{Error, Result};
use crate::io::records::{DetectionRecord, TruthRecord};

/// Largest timestamp difference at which a detection frame and a ground
/// truth frame are considered the same frame, seconds.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameCount {
    pub detected: usize,
    pub ground_truth: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountSeries {
    pub timestamps: Vec<f64>,
    pub counts: Vec<FrameCount>,
}

impl CountSeries {
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let counts: Vec<FrameCount> = counts
            .into_iter()
            .map(|(detected, ground_truth)| FrameCount {
                detected,
                ground_truth,
            })
            .collect();
        let timestamps = (0..counts.len()).map(|i| i as f64).collect();
        Self { timestamps, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn positive_frames(&self) -> usize {
        self.counts.iter().filter(|c| c.ground_truth >= 1).count()
    }

    fn hit_frames(&self) -> usize {
        self.counts
            .iter()
            .filter(|c| c.ground_truth >= 1 && c.detected >= 1)
            .count()
    }

    fn gt_total(&self) -> usize {
        self.counts.iter().map(|c| c.ground_truth).sum()
    }

    fn matched_total(&self) -> usize {
        self.counts
            .iter()
            .map(|c| c.detected.min(c.ground_truth))
            .sum()
    }

    fn overcount_frames(&self) -> usize {
        self.counts
            .iter()
            .filter(|c| c.detected > c.ground_truth)
            .count()
    }
}

/// Share of frames with at least one true pedestrian in which at least one
/// pedestrian was detected.
pub fn frame_recall(s: &CountSeries) -> Result<f64> {
    let positive = s.positive_frames();
    if positive == 0 {
        return Err(Error::UndefinedMetric(
            "frame recall needs a frame with ground truth",
        ));
    }
    Ok(s.hit_frames() as f64 / positive as f64)
}

/// `Σ min(detected, truth) / Σ truth`; overcounting earns no extra credit.
pub fn person_count_recall(s: &CountSeries) -> Result<f64> {
    let total = s.gt_total();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "person-count recall needs ground truth",
        ));
    }
    Ok(s.matched_total() as f64 / total as f64)
}

/// Share of all frames in which more pedestrians were detected than present.
pub fn false_alarm_rate(s: &CountSeries) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric(
            "false-alarm rate needs at least one frame",
        ));
    }
    Ok(s.overcount_frames() as f64 / s.len() as f64)
}

/// Joins a detection log with ground truth frame by frame and counts
/// pedestrians on each side.
///
/// Both streams must list the same frames in the same order, with timestamps
/// agreeing within [`ALIGNMENT_TOLERANCE`]. Only visible ground-truth
/// pedestrians count.
pub fn count_pedestrians(
    detections: &[DetectionRecord],
    truth: &[TruthRecord],
) -> Result<CountSeries> {
    if detections.len() != truth.len() {
        return Err(Error::LengthMismatch {
            detections: detections.len(),
            truth: truth.len(),
        });
    }
    let mut series = CountSeries::default();
    for (d, g) in detections.iter().zip(truth) {
        // Small slack so that a 1 ms offset written in decimal still aligns.
        if (d.t - g.t).abs() > ALIGNMENT_TOLERANCE + 1e-9 {
            return Err(Error::AlignmentError {
                detection: d.t,
                truth: g.t,
            });
        }
        series.timestamps.push(d.t);
        series.counts.push(FrameCount {
            detected: d
                .detections
                .iter()
                .filter(|o| o.object_type == ObjectType::Pedestrian)
                .count(),
            ground_truth: g
                .objects
                .iter()
                .filter(|o| o.class == ObjectType::Pedestrian && o.visible)
                .count(),
        });
    }
    Ok(series)
}

/// Metric values together with the counts behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub frames: usize,
    pub positive_frames: usize,
    pub hit_frames: usize,
    pub gt_total: usize,
    pub matched_total: usize,
    pub overcount_frames: usize,
    pub frame_recall: Option<f64>,
    pub person_count_recall: Option<f64>,
    pub false_alarm_rate: Option<f64>,
}

impl MetricsReport {
    pub fn compute(s: &CountSeries) -> Self {
        Self {
            frames: s.len(),
            positive_frames: s.positive_frames(),
            hit_frames: s.hit_frames(),
            gt_total: s.gt_total(),
            matched_total: s.matched_total(),
            overcount_frames: s.overcount_frames(),
            frame_recall: frame_recall(s).ok(),
            person_count_recall: person_count_recall(s).ok(),
            false_alarm_rate: false_alarm_rate(s).ok(),
        }
    }

    /// Human-readable summary, one metric per line.
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, name: &str, num: usize, den: usize, v: Option<f64>| {
            let shown = v.map_or_else(|| "undefined".to_string(), display_percent);
            let _ = writeln!(out, "{name:<22} {num}/{den} = {shown}");
        };
        line(
            &mut out,
            "Frame-wise recall:",
            self.hit_frames,
            self.positive_frames,
            self.frame_recall,
        );
        line(
            &mut out,
            "Person-count recall:",
            self.matched_total,
            self.gt_total,
            self.person_count_recall,
        );
        line(
            &mut out,
            "False-alarm rate:",
            self.overcount_frames,
            self.frames,
            self.false_alarm_rate,
        );
        let _ = writeln!(
            out,
            "(false alarms are counted over all {} frames)",
            self.frames
        );
        out
    }

    /// `key=value` lines; undefined metrics are written as `nan`.
    pub fn render_machine(&self) -> String {
        let value = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| x.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "frames={}", self.frames);
        let _ = writeln!(out, "positive_frames={}", self.positive_frames);
        let _ = writeln!(out, "hit_frames={}", self.hit_frames);
        let _ = writeln!(out, "gt_total={}", self.gt_total);
        let _ = writeln!(out, "matched_total={}", self.matched_total);
        let _ = writeln!(out, "overcount_frames={}", self.overcount_frames);
        let _ = writeln!(out, "frame_recall={}", value(self.frame_recall));
        let _ = writeln!(
            out,
            "person_count_recall={}",
            value(self.person_count_recall)
        );
        let _ = writeln!(out, "false_alarm_rate={}", value(self.false_alarm_rate));
        out
    }

    /// Human lines as `#` comments followed by the machine lines.
    pub fn render_report(&self) -> String {
        let mut out = String::new();
        for l in self.render_human().lines() {
            let _ = writeln!(out, "# {l}");
        }
        out.push_str(&self.render_machine());
        out
    }
}

/// Percentage to at most six decimals followed by the whole-number
/// rounding, e.g. `93.75% (94%)`.
pub fn display_percent(ratio: f64) -> String {
    let pct = ratio * 100.0;
    let exact = format!("{pct:.6}");
    let exact = exact.trim_end_matches('0').trim_end_matches('.');
    format!("{exact}% ({}%)", pct.round())
}
