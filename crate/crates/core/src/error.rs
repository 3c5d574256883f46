use thiserror::Error;

/// Errors raised by the state algebra, the imaging model and the QFI engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariance matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance matrix violates the uncertainty principle (min eigenvalue of V + iΩ is {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("symplectic spectrum lost its pairing structure (mismatch {mismatch:e})")]
    DegeneracyBreakdown { mismatch: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degree of mutual coherence undefined: mode {mode} is dark")]
    UndefinedCoherence { mode: usize },

    #[error("divergent QFI term (l={l}, j={j}, k={k}): numerator {numerator:e}, denominator {denominator:e}")]
    DivergentTerm {
        l: usize,
        j: usize,
        k: usize,
        numerator: f64,
        denominator: f64,
    },

    #[error("upper bound undefined: 1 - κ(1±δ) = {margin:e}")]
    DivisionGuard { margin: f64 },

    #[error("quadrature oracle did not converge with {nodes} nodes per axis (last change {change:e})")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    #[error("fidelity oracle is uncertain: step levels disagree by {relative_change:e}")]
    OracleUncertain { relative_change: f64 },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("sweep row {row} (d = {d}): {source}")]
    SweepRow {
        row: usize,
        d: f64,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
