use thiserror::Error;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain is not contained in the hemisphere: {0}")]
    HemisphereViolation(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("non-monotone radial profile at theta = {theta}")]
    NonMonotoneProfile { theta: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("requested {requested} eigenpairs but the system only has dimension {n}")]
    TooManyEigenpairs { requested: usize, n: usize },

    #[error("point lies outside the mesh: ({0}, {1})")]
    OutsideMesh(f64, f64),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("balancing search stagnated with residual {residual:e}")]
    BalancingStagnated { residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical solvers rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Shooting(_)
                | Error::NonMonotoneProfile { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::Quadrature(_)
                | Error::BalancingStagnated { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
