use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid wave parameters: {0}")]
    InvalidWave(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("point ({x}, {y}) lies outside the grid domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("source at ({x}, {y}) is inside or too close to the domain")]
    SourceInsideDomain { x: f64, y: f64 },
    #[error("zero-energy reference field")]
    ZeroEnergy,
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("sample count mismatch: header declares {declared}, file holds {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("checksum mismatch")]
    Checksum,
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}
