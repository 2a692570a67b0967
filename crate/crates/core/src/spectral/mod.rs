//! Conformal Laplacian `L = -a_n Delta + R`, boundary operator
//! `B = d_nu + b_n h`, Rayleigh quotients and principal eigenpairs.
//!
//! Sign conventions: `nu` is the inward unit normal and `h` the mean
//! curvature it induces. The weak form behind every problem is
//! `a_n int |grad f|^2 + int R f^2 - 2(n-1) int_bdry h f^2`; its
//! stationary points satisfy `L u = lambda u`, `B u = 0` (s = 1) and
//! `L u = 0`, `-a_n B u = lambda u` (s = 0).

mod checks;
mod operators;
mod solver;

pub use checks::{c2_norm, eigen_bounds_check, harnack_ratio, harnack_stability, EigenBoundsReport, HarnackReport, BOUND_SLACK};
pub use operators::{a_n, assemble, b_n, rayleigh_quotient, OperatorPair, Problem};
pub use solver::{solve_principal, solve_principal_with, EigenSolution, SolverOptions};
