use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("parameter {x} outside [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("invalid mesh specification `{0}` (expected uniform:NX[xNY], refined-ej or refined-p1)")]
    MeshSpec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error("singular matrix: zero pivot in column {0}")]
    Singular(usize),

    #[error("matrix not positive definite: pivot {index} is {pivot}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("Jacobi iteration did not converge in {0} sweeps")]
    IterationLimit(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("quadrature rule with {0} points is not supported (1..=8)")]
    QuadratureOrder(usize),
}
