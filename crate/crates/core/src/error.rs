use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument, config value, or incompatible pairing of inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("stencil needs {width} ghost cells but the grid only has {n_cells} cells")]
    StencilTooWide { width: usize, n_cells: usize },

    /// Vacuum or otherwise unphysical state (h <= 0, rho <= 0, p <= 0).
    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("solution blew up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("rollout failed at step {step}: {reason}")]
    RolloutFailed { step: usize, reason: String },

    #[error("training aborted after {failures} consecutive failed epochs (last: {last})")]
    TrainingAborted { failures: usize, last: String },

    /// On-disk artifact is malformed: shape mismatch, bad checksum, wrong endianness.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::StencilTooWide { .. } => 1,
            Error::Inadmissible(_)
            | Error::NonFinite(_)
            | Error::BlowUp { .. }
            | Error::RolloutFailed { .. }
            | Error::TrainingAborted { .. } => 2,
            Error::Format(_) | Error::Io(_) => 3,
        }
    }

    pub fn is_numerical(&self) -> bool {
        self.exit_code() == 2
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
