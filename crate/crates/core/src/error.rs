use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis dimension {dimension} exceeds the configured limit {limit}")]
    Capacity { dimension: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coupling J[{i}][{j}] = {magnitude:.6e} exceeds the power-law cap {cap:.6e} (alpha = {alpha})")]
    CapViolation {
        i: usize,
        j: usize,
        magnitude: f64,
        cap: f64,
        alpha: f64,
    },

    #[error("divergent cluster-distance sum: alpha = {alpha} must exceed D = {dimension}")]
    Divergence { alpha: f64, dimension: usize },

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible decomposition plan: {0}")]
    InfeasiblePlan(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("inconsistent bounds: {0}")]
    Inconsistent(String),

    #[error("index ({row}, {col}) outside a {rows}x{cols} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}
