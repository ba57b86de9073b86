use thiserror::Error;

/// Errors surfaced by grid construction, operator evaluation, solvers and
/// diagnostics. Diagnostics that merely fail a hypothesis report that inside
/// their report type instead of erroring.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at lattice index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel violates {0}")]
    InvalidKernel(String),

    #[error("empty sample window: {0}")]
    EmptyWindow(String),

    #[error("spectral transform left imaginary residue {residue:.3e} above {limit:.3e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("quadrature tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    TailBound { bound: f64, tolerance: f64 },

    #[error("gradient magnitude {observed:.3e} exceeds p_max {p_max:.3e} at t = {time:.6}")]
    GradientRange {
        observed: f64,
        p_max: f64,
        time: f64,
    },

    #[error("drift bound violated: |w| = {observed:.3e} > A = {bound:.3e}")]
    DriftBound { observed: f64, bound: f64 },

    #[error("cascade has only {resolved} resolvable levels (need {needed})")]
    TooFewLevels { resolved: usize, needed: usize },

    #[error("time shift beyond the last frame: stride {stride}, frames {frames}")]
    TimeShift { stride: usize, frames: usize },

    #[error("operation requires a 1-d field, got dim = {0}")]
    DimMismatch(usize),

    #[error("file format: {0}")]
    Format(String),

    #[error("field payload length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
