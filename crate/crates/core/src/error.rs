use std::io;

use thiserror::Error;

use crate::optim::LpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix is singular at the working tolerance")]
    Singular,

    #[error("linear program did not reach optimality: {0:?}")]
    Lp(LpStatus),

    #[error("path quadratic program is infeasible: {0}")]
    QpInfeasible(String),

    #[error("active-set method exceeded {0} working-set changes")]
    MaxActiveSetSwaps(usize),

    #[error("no alpha satisfies the auxiliary constraint")]
    InfeasibleEverywhere,

    #[error("feasible interval is empty")]
    EmptyInterval,

    #[error("degenerate axis: all x values are equal")]
    DegenerateAxis,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
