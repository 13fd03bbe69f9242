//! Error type carrying the process exit code.
//!
//! The contract is script-friendly: 0 success, 2 for anything wrong with
//! inputs (missing files, bad config, empty corpus), 3 for numerical
//! failures during training, 4 for integrity failures (corrupt
//! checkpoints, broken round-trips).

use std::fmt;

use assertgen_core::abstractor::AbstractorError;
use assertgen_core::evalkit::EvalError;
use assertgen_core::miner::MinerError;
use assertgen_core::neural::NeuralError;

/// Exit code for input errors.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for integrity failures.
pub const EXIT_INTEGRITY: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing input: files, directories, configuration.
    Input(String),
    /// Training produced a non-finite loss or similar numeric breakdown.
    Numerical(String),
    /// An artifact failed verification (hash mismatch, round-trip break).
    Integrity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Integrity(_) => EXIT_INTEGRITY,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Integrity(msg) => write!(f, "integrity failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<MinerError> for CliError {
    fn from(e: MinerError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AbstractorError> for CliError {
    fn from(e: AbstractorError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::NonFiniteLoss { .. } => CliError::Numerical(e.to_string()),
            NeuralError::CorruptCheckpoint { .. } => CliError::Integrity(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Attaches a path to bare I/O errors, which otherwise say only
/// "No such file or directory".
pub fn with_path<T, E: fmt::Display>(
    result: Result<T, E>,
    path: &std::path::Path,
) -> Result<T, CliError> {
    result.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
