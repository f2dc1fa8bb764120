use thiserror::Error;

/// Errors raised by the interval algebra, the map oracles, the estimators and
/// the generalized-equation solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: lower endpoint exceeds upper endpoint or is NaN")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("point {x} is outside the domain of `{label}`")]
    Domain { label: String, x: f64 },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("precondition not met: {0}")]
    Applicability(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("subproblem failure at x_k = {x_k}: no bracketing cell (scan minimum {scan_min} at {scan_argmin})")]
    SubproblemFailure {
        x_k: f64,
        scan_min: f64,
        scan_argmin: f64,
    },

    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
