use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("jets do not share a base point")]
    BasePointMismatch,

    #[error("jet is not a unit: |constant term| = {0:e}")]
    SingularJet(f64),

    #[error("constant-term matrix is singular: |det| = {0:e}")]
    SingularMatrix(f64),

    #[error("cannot differentiate an order-0 jet")]
    JetUnderflow,

    #[error("jet order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("metric is singular or indefinite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("insufficient jet budget: need jet order {required}, have {available}")]
    Budget { required: usize, available: usize },

    #[error("symbol is truncated at order {available}, order {required} is needed")]
    Truncation { required: i32, available: i32 },

    #[error("quadratic form vanishes at the requested covector")]
    SingularCovector,

    #[error("incompatible symbols: {0}")]
    Incompatible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Fourier tail {tail:e} exceeds threshold {threshold:e}; increase the grid")]
    Resolution { tail: f64, threshold: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("heat-trace fit invalid: {0}")]
    FitInvalid(String),

    #[error("imaginary leak {leak:e} exceeds threshold for residue {value:e}")]
    ImaginaryLeak { value: f64, leak: f64 },
}
