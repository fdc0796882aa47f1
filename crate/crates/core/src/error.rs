use thiserror::Error;

use crate::coupling::PicardReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("size mismatch: expected {expected}, got {actual} ({context})")]
    SizeMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("function is not in W_r0: |u(1)| = {trace:e} exceeds {limit:e}")]
    NotInWr0 { trace: f64, limit: f64 },

    #[error("empty eigenbasis")]
    EmptyBasis,

    #[error(
        "generalized eigensolve did not converge within {max_iterations} sweeps (size {size})"
    )]
    EigenNonConvergence { size: usize, max_iterations: usize },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("axial march produced non-finite values (species {species}, time index {time})")]
    UnstableMarch { species: usize, time: usize },

    #[error("time step {dt:e} exceeds the reaction stability limit; need dt <= {required:e}")]
    TimeStepTooLarge { dt: f64, required: f64 },

    #[error("probe inputs are identical; the ratio denominator vanishes")]
    ZeroDenominator,

    #[error("horizon {0} does not coincide with a time node of the probe grid")]
    HorizonOffGrid(f64),

    #[error("Picard iteration did not converge in {} iterations (last increment {:e})", .report.iterations, .report.iterates.last().copied().unwrap_or(f64::NAN))]
    NotConverged { report: Box<PicardReport> },

    #[error("oracle inner iteration did not converge at time index {time} (change {change:e})")]
    OracleNonConvergence { time: usize, change: f64 },

    #[error("shooting could not bracket eigenvalue {index}")]
    BracketFailure { index: usize },

    #[error("oracle instance too large: {nodes} nodes exceeds {limit}")]
    InstanceTooLarge { nodes: usize, limit: usize },
}

pub(crate) fn ensure_len(actual: usize, expected: usize, context: &'static str) -> Result<()> {
    if actual != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual,
            context,
        });
    }
    Ok(())
}
