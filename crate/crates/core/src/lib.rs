//! Finite-difference laboratory for the generalized derivative nonlinear
//! Schrödinger equation `i u_t + u_xx + i |u|^{2 sigma} u_x = 0` on a bounded
//! interval with homogeneous Dirichlet data.
//!
//! The crate provides the grid and stencils, the conserved and estimate
//! functionals, the Yosida regularization `J_m`, a conservative midpoint
//! time stepper and the gauge transformation diagnostics.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod gauge;
pub mod grid;
pub mod par;
pub mod tridiag;
pub mod yosida;

pub use error::{Error, Result};
pub use evolution::{
    duhamel_residual, evolve, growth_probe, ConservedSample, NonlinearityKind, PartialRun, Solver,
    SolverParams, Trajectory,
};
pub use functionals::{Sigma, SigmaRegime};
pub use grid::{d1, d2, Field, Grid};
pub use par::Execution;
pub use yosida::YosidaOp;
