use thiserror::Error;

use crate::opalgebra::Chart;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: Chart, right: Chart },

    #[error("unknown coordinate `{name}` on chart {chart}")]
    UnknownCoordinate { name: String, chart: Chart },

    #[error("function is not constant along the fibers (X3 residual: {residual})")]
    NotFiberInvariant { residual: String },

    #[error("function does not descend to the 3D chart: {0}")]
    NotDescendable(String),

    #[error("operator is not projectable: X3 of its image of {probe} is {residual}")]
    NotProjectable { probe: String, residual: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported in matrix mode: {0}")]
    Unsupported(String),

    #[error("eigenproblem does not separate into an operator and a pure-parameter eigenvalue")]
    NonSeparable,

    #[error("syntax error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}
