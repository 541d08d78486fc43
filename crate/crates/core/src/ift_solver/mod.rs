//! Newton solves for the reduced ASD equation on glued profiles.

pub mod conformal;
pub mod linearize;
pub mod solver;
pub mod verify;

pub use conformal::{conformal_jet, linearized_invariance, LinearizedInvariance};
pub use linearize::{LinearizedSystem, ReducedPerturbation, Strip};
pub use solver::{
    corrected_profile, newton_step, nondegeneracy_check, quadratic_tail, solve_asd, solve_with, weighted_norm,
    write_iterations_csv, IterationLog, NewtonContext, NondegeneracyReport, SolverOptions, SolverState, TailReport,
};
pub use verify::{chart_verification, ChartCheck};
