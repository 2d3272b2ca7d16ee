//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("non-monotonic time at sample {index}: {prev} -> {next}")]
    NonMonotonicTime { index: usize, prev: f64, next: f64 },

    #[error("time gap of {gap}s at sample {index} exceeds the configured maximum of {max}s")]
    TimeGapExceeded { index: usize, gap: f64, max: f64 },

    #[error("empty interaction point set")]
    EmptyPointSet,

    #[error("invalid rotation: {0}")]
    InvalidRotation(String),

    #[error("hand {0} not present in frame")]
    HandNotInFrame(u32),

    #[error("sequence dimension mismatch: {a} vs {b}")]
    DimMismatch { a: usize, b: usize },

    #[error("empty sequence passed to {op}")]
    EmptySequence { op: &'static str },

    #[error("motion feature {value} out of range [{lo}, {hi}] in dimension {dim}")]
    FeatureOutOfRange { dim: usize, value: i64, lo: i64, hi: i64 },

    #[error("morphological filter length must be odd, got {0}")]
    EvenFilterLength(usize),

    #[error("k = {k} exceeds the number of sequences ({n})")]
    KTooLarge { k: usize, n: usize },

    #[error("elbow selection needs a WCSS range of at least 3 values, got {0}")]
    ElbowRangeTooShort(usize),

    #[error("clustering inputs index different IU sets: {a} vs {b} entries")]
    LabelIndexMismatch { a: usize, b: usize },

    #[error("multi-subject grid is missing (type {iu_type}, subject {subject}, repetition {rep})")]
    MissingGridCell { iu_type: String, subject: String, rep: usize },

    #[error("training needs at least 2 executions, got {0}")]
    NotEnoughExecutions(usize),

    #[error("execution {execution} diverges from the training skeleton at {position}: {detail}")]
    SkeletonMismatch { execution: usize, position: String, detail: String },

    #[error("evaluate_iu called after all candidates were eliminated; reset the activity first")]
    MonitorNotReset,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown scenario template '{0}'")]
    UnknownTemplate(String),

    #[error("unsupported scenario option: {0}")]
    UnsupportedScenario(String),

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("frame {frame} failed validation: {summary}")]
    InvalidFrame { frame: usize, summary: String },

    #[error("unsupported model file version {0}")]
    ModelVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
