use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("argument error: {0}")]
    Argument(String),

    /// Time derivatives only exist at interior knots.
    #[error("time derivative requested at knot {index}, valid knots are 1..={last}")]
    EndpointDerivative { index: usize, last: usize },

    #[error(
        "{what} is not strictly convex at node {node} (min Hessian eigenvalue {min_eigenvalue:e})"
    )]
    NotConvex {
        what: String,
        node: usize,
        min_eigenvalue: f64,
    },

    #[error("range coverage: {0}")]
    RangeCoverage(String),

    #[error("solver precondition: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
