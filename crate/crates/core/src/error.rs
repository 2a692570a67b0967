use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} not supported: the conformal exponent 4/(n-2) needs n >= 3")]
    Dimension(usize),
    #[error("axis {axis}: {nodes} nodes given, at least {min} required")]
    TooFewNodes { axis: usize, nodes: usize, min: usize },
    #[error("axis {axis}: invalid range [{lo}, {hi}]")]
    InvalidRange { axis: usize, lo: f64, hi: f64 },
    #[error("metric not positive definite at node {node} (coordinates {coords:?})")]
    NotPositiveDefinite { node: usize, coords: Vec<f64> },
    #[error("metric not symmetric at node {node}")]
    NotSymmetric { node: usize },
    #[error("singular matrix at node {node}")]
    Singular { node: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("non-positive value {value} at node {node}")]
    NonPositive { node: usize, value: f64 },
    #[error("unknown metric formula `{0}`")]
    UnknownFormula(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("basepoint: {0}")]
    Basepoint(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("derivative order {requested} not supported on this grid; max supported k = {max}")]
    DerivativeOrder { requested: usize, max: usize },
    #[error("boundary is empty")]
    EmptyBoundary,
    #[error("zero denominator in Rayleigh quotient")]
    ZeroDenominator,
    #[error("solver did not converge in {iterations} iterations (last residual {last:e})")]
    NonConvergence { iterations: usize, last: f64, history: Vec<f64> },
    #[error("non-principal mode: {nonpositive} nodes are not positive after sign fix (grid too coarse?)")]
    NonPrincipal { nonpositive: usize, history: Vec<f64> },
    #[error("shifted operator is not positive definite (last shift {shift})")]
    Indefinite { shift: f64 },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("extension scheme: {0}")]
    Scheme(String),
    #[error("height function: {0}")]
    Height(String),
    #[error("cut: {0}")]
    Cut(String),
    #[error("flow left the band after time {time}")]
    LeftBand { time: f64 },
    #[error("sequence index {index}: {source}")]
    Sequence {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Residual history carried by solver failures.
    pub fn residual_history(&self) -> Option<&[f64]> {
        match self {
            Error::NonConvergence { history, .. } | Error::NonPrincipal { history, .. } => Some(history),
            Error::Sequence { source, .. } => source.residual_history(),
            _ => None,
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::NonPrincipal { .. } | Error::Indefinite { .. } => true,
            Error::Sequence { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
