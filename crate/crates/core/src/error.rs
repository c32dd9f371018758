use thiserror::Error;

use crate::metric::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    DisconnectedGraph(usize),

    #[error("not a valid metric ({} violations, first: {:?})", .0.len(), .0.first())]
    InvalidMetric(Vec<Violation>),

    #[error("l1 realization failed: best distortion {best_distortion}")]
    RealizationFailed { best_distortion: f64 },

    #[error("calibration failed: discrepancy {discrepancy} above 0.01 at C = {c} (raise J)")]
    CalibrationFailed { c: f64, discrepancy: f64 },

    #[error("event not achieved in {tries} tries: best min ratio {best_min_ratio} below {threshold}")]
    EventNotAchieved {
        tries: usize,
        best_min_ratio: f64,
        threshold: f64,
        best: Box<crate::stable::Theorem1Embedding>,
    },

    #[error("scale {0} missing from the multi-scale embedding")]
    IncompleteScales(i32),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
