use alloc::string::String;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("angle {0} is outside the open interval (0, pi/2)")]
    AngleOutOfRange(f64),
    #[error("need at least {min} qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("at most {max} qubits are supported, got {got}")]
    TooManyQubits { max: usize, got: usize },
    #[error("expected {expected} qubits, got {got}")]
    WrongQubitCount { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max deviation {0})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("eigen-decomposition did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error("no state prepared for input pair ({0}, {1})")]
    MissingState(u8, u8),
    #[error("no observation for source {label} with observable {observable}")]
    MissingObservation { label: String, observable: String },
    #[error("invalid paradox specification: {0}")]
    InvalidSpec(String),
    #[error("position {position} is invalid for {n} qubits")]
    InvalidPosition { position: usize, n: usize },
    #[error("axis {0} cannot be used as a measurement setting")]
    InvalidAxis(char),
    #[error("cannot parse observable chain from {0:?}")]
    ParseObservable(String),
    #[error("total count is zero")]
    ZeroCounts,
    #[error("missing tomography setting {0}{1}")]
    MissingSetting(char, char),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("linear program failed: {0}")]
    Lp(&'static str),
}

pub type Result<T> = core::result::Result<T, CoreError>;
