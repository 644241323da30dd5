//! Dense numerical kernels: a revised-simplex LP solver, an SPD linear
//! solve, and the active-set QP that serves as the path oracle.

pub mod dense;
pub mod lp;
pub mod qp;
pub mod spd;

pub use dense::Matrix;
pub use lp::{solve_lp, solve_standard_form, ColumnSource, LpOptions, LpProblem, LpSolution, LpStatus};
pub use qp::{solve_path_qp, KktReport, QpOptions, QpSolution};
pub use spd::{solve_spd, solve_spd_with_ridge};
