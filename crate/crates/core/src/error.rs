use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("matrix is not normalized: spectral norm {norm} exceeds 1")]
    NotNormalized { norm: f64 },

    #[error("no truncation order up to {cap} reaches epsilon {epsilon:e}")]
    OrderOverflow { cap: usize, epsilon: f64 },

    #[error("aggregation needs more than {max} distinct unitaries")]
    AggregationOverflow { max: usize },

    #[error("register needs {required_qubits} qubits ({required_dim} amplitudes), cap is {cap} amplitudes")]
    Capacity {
        required_qubits: usize,
        required_dim: f64,
        cap: usize,
    },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("circuit build error: {0}")]
    Build(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("degenerate schedule: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than resource limits.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
