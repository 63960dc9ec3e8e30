//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Zadoff-Chu length must be odd, got {0}")]
    EvenLength(usize),
    #[error("Zadoff-Chu length must be at least {min}, got {got}")]
    LengthTooShort { got: usize, min: usize },
    #[error("root {root} out of range for length {length}")]
    RootOutOfRange { root: usize, length: usize },
    #[error("root {root} is not coprime with length {length}")]
    RootNotCoprime { root: usize, length: usize },
    #[error("SNR must be finite and nonnegative, got {0}")]
    InvalidSnr(f64),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid coding spec: {0}")]
    InvalidCodingSpec(String),
    #[error("detection threshold must be finite and nonnegative, got {0}")]
    InvalidDelta(f64),
    #[error("power split alpha must lie strictly inside (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("preamble length {np} must be shorter than the packet length {n}")]
    PreambleTooLong { np: usize, n: usize },
    #[error("detection sequence length {got} does not match the packet length {expected}")]
    SequenceLengthMismatch { got: usize, expected: usize },
    #[error("invalid threshold bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("objective evaluated to non-finite value {value} at delta = {delta}")]
    NonFiniteObjective { delta: f64, value: f64 },
    #[error("no admissible design in the scanned grid")]
    EmptyDesignGrid,
    #[error("at least one Monte Carlo trial is required")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
