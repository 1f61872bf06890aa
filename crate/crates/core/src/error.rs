use thiserror::Error;

/// Errors produced anywhere in the perception stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point at the sensor origin has no defined direction")]
    DegeneratePoint,

    #[error("unknown filter profile `{0}`")]
    UnknownProfile(String),

    #[error("no pose available at t = {t:.6} s: {reason}")]
    PoseGap { t: f64, reason: String },

    #[error("pose at t = {t:.6} s does not follow newest pose at {newest:.6} s")]
    PoseOrder { t: f64, newest: f64 },

    #[error("frame at t = {curr:.6} s does not follow previous frame at {prev:.6} s")]
    FrameOrder { prev: f64, curr: f64 },

    #[error("cluster has no usable members")]
    EmptyCluster,

    #[error("metric is undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error(
        "detection at t = {detection:.6} s does not align with ground truth at t = {truth:.6} s"
    )]
    AlignmentError { detection: f64, truth: f64 },

    #[error("detection log has {detections} frames but ground truth has {truth}")]
    LengthMismatch { detections: usize, truth: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
