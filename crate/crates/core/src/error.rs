use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Hilbert space or truncated Fock space exceeds its configured cap.
    #[error("capacity exceeded: {what} has dimension {dim}, cap is {cap}")]
    Capacity {
        what: String,
        dim: usize,
        cap: usize,
    },

    #[error("no sign change of the second derivative found in ({lo}, {hi}] for phi = {phi}")]
    RootNotFound { phi: f64, lo: f64, hi: f64 },

    /// Inputs that must share a geometry do not.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("eigensolver failed to converge (matrix fingerprint {fingerprint:#018x}, dim {dim})")]
    EigenSolver { fingerprint: u64, dim: usize },

    #[error("ambiguous separable-mode match: found {found} of {expected}; near-degenerate candidates {candidates:?}")]
    Degeneracy {
        expected: usize,
        found: usize,
        candidates: Vec<usize>,
    },

    #[error("integration failed at t = {t}: trace drift {drift:.3e}; try a smaller dt")]
    Integration { t: f64, drift: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by exceeding a dimension cap.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
