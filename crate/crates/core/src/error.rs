use thiserror::Error;

/// Errors produced by the simulator and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resource limit: {qubits} qubits exceeds the dense-matrix cap of {cap}")]
    ResourceLimit { qubits: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("non-physical coefficients: minimum eigenvalue {min_eigenvalue:.3e}")]
    NonPhysical { min_eigenvalue: f64 },

    #[error("invalid Bloch vector: norm {norm} exceeds 1")]
    InvalidBloch { norm: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid POVM: element {index} has minimum eigenvalue {eigenvalue:.3e}")]
    PovmNotPositive { index: usize, eigenvalue: f64 },

    #[error("invalid POVM: elements sum to identity only within {deviation:.3e}")]
    PovmIncomplete { deviation: f64 },

    #[error("coefficient at {label} is unrecoverable: ancilla coefficient vanishes")]
    Unrecoverable { label: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable kind, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ResourceLimit { .. } => "resource-limit",
            Error::InvalidState(_) => "invalid-state",
            Error::NonPhysical { .. } => "non-physical-coefficients",
            Error::InvalidBloch { .. } => "invalid-bloch",
            Error::Argument(_) => "argument",
            Error::PovmNotPositive { .. } | Error::PovmIncomplete { .. } => "invalid-povm",
            Error::Unrecoverable { .. } => "unrecoverable-coefficient",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
