//! Sparse and dense linear algebra used by the discretization.

mod cg;
mod cond;
mod factor;
pub mod small;
mod solve;
mod sparse;

pub use cg::{pcg_solve, CgOutcome};
pub use cond::{
    condition_number, condition_number_lanczos, condition_number_with_cap, diagonally_scaled, estimate_condition,
    lanczos_extremes, CondMethod, Preconditioning, DENSE_CAP,
};
pub use factor::{symmetric_eigenvalues, Factorization};
pub use solve::{solve, Solution, SolverKind, DENSE_SOLVE_LIMIT, SOLVE_TOLERANCE};
pub use sparse::CoeffMatrix;
