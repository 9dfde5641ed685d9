use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("charge cutoff {0} is too small (need N >= 5)")]
    CutoffTooSmall(usize),

    #[error("transmon spectrum did not converge before charge cutoff {0}")]
    NotConverged(usize),

    #[error("target transition frequency unreachable in the transmon regime: {0}")]
    Unreachable(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("frequency {0:.6e} rad/s is outside the tabulated range [{1:.6e}, {2:.6e}]")]
    OutOfRange(f64, f64, f64),

    #[error("impedance is not capacitive in the requested band: {0}")]
    NotCapacitive(String),

    #[error("netlist error: {0}")]
    Netlist(String),

    #[error("no resonant branch found: {0}")]
    NoResonance(String),

    #[error("exact resonance between a transition and a mode at {0:.9e} rad/s")]
    Resonance(f64),

    #[error("insufficient band coverage: {0}")]
    BandCoverage(String),

    #[error("Hilbert space dimension {dim} exceeds the dense-solver limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("ZZ rate changed by {change:.3e} rad/s between truncations {d} and {}", d + 2)]
    TruncationNotConverged { d: usize, change: f64 },

    #[error("state labelling failed: {0}")]
    Labelling(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
