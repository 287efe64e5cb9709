//! Solvers for the smoothing problem: the convex relaxation, the
//! unconstrained baseline, and Gaussian circular-mean filtering.

mod baseline;
mod filter;
mod relaxation;

pub use baseline::{solve_baseline, BaselineResult, CG_TOL};
pub use filter::{circular_mean_filter, FilterOutput, TRUNCATION};
pub use relaxation::{
    solve_relaxation, solve_relaxation_from, SolveReport, SolverConfig, TraceEntry,
};
