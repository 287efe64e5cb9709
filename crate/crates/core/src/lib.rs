//! Tikhonov smoothing and interpolation of circle-valued signals on graphs.
//!
//! The nonconvex problem of fitting unit-modulus values `x_n` to data `y_n`
//! with quadratic edge penalties is relaxed to a semidefinite program over
//! per-edge 3x3 moment matrices. When the relaxed solution is rank one on
//! every edge it is certified globally optimal for the original problem.

pub mod circle;
pub mod error;
pub mod graph;
pub mod hermitian;
pub mod io;
pub mod lifting;
pub mod oracle;
pub mod solvers;
pub mod synth;

pub use circle::{CircleSignal, NodeWeight, ProblemInstance};
pub use error::{Error, Result};
pub use graph::{build_chain, build_grid, Graph, Topology};
pub use hermitian::Hermitian3;
pub use lifting::{LiftedVariables, TightnessCertificate};
pub use solvers::{SolveReport, SolverConfig};
