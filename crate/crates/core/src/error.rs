use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid frame parameters: {0}")]
    InvalidParams(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid gap range: {0}")]
    InvalidGap(String),
    #[error("weighting scheme {0} is not computable per frame; use the reweighting driver")]
    UnsupportedScheme(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),
    #[error("original signal has zero energy over the gap; SNR is undefined")]
    ZeroEnergyOriginal,
    #[error("insufficient context: {0}")]
    InsufficientContext(String),
    #[error("analysis segment length {segment} exceeds gap length {gap}")]
    SegmentExceedsGap { segment: usize, gap: usize },
    #[error("curve knots must be strictly increasing and lie strictly inside the gap")]
    NonMonotoneKnots,
    #[error("AR order {order} too large: {missing} missing samples in a segment of {segment}")]
    OrderTooLarge {
        order: usize,
        missing: usize,
        segment: usize,
    },
}
