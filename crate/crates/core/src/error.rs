use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("photon number mismatch: input carries {input} photons, output {output}")]
    PhotonMismatch { input: usize, output: usize },

    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("matrix is not unitary (max-norm deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("permanent of a {size}x{size} matrix exceeds the configured limit {limit}")]
    PermanentTooLarge { size: usize, limit: usize },

    #[error("desk limit exceeded: {0}")]
    DeskLimit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("operation requires a lossless network")]
    LossyNetwork,

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

impl Error {
    /// Whether the error reports a violated modelling hypothesis or a resource
    /// limit rather than malformed input.
    pub fn is_limit_violation(&self) -> bool {
        matches!(
            self,
            Error::DeskLimit(_) | Error::Hypothesis(_) | Error::PermanentTooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
