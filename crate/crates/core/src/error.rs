use thiserror::Error;

/// Errors raised by the numerical kernels and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what} at t = {at}")]
    NonFiniteValue { what: &'static str, at: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("resolution too coarse: {nodes} nodes across the diameter, need at least {required}")]
    ResolutionTooCoarse { nodes: usize, required: usize },

    #[error("variation is not admissible: defect {defect:.3e} exceeds bound {bound:.3e}")]
    NotAdmissible { defect: f64, bound: f64 },

    #[error("no resolvable plateau annulus: {0}")]
    NoPlateau(String),

    #[error("invalid family spec: {0}")]
    SpecInvalid(String),

    #[error("index {index} out of range (valid: {valid})")]
    IndexOutOfRange { index: usize, valid: String },

    #[error("precondition not verified: {0}")]
    PreconditionNotVerified(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by user input (files, flags, specs) as
    /// opposed to numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::SpecInvalid(_)
                | Error::InvalidProfile(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::IndexOutOfRange { .. }
                | Error::ResolutionTooCoarse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
