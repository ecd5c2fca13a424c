//! Minimization of quantum Rényi information quantities over density
//! matrices with first-order mirror-descent methods.
//!
//! The crate is organised bottom-up: [`linalg`] provides Hermitian matrix
//! functions and their Fréchet derivatives, [`states`] the validated state
//! types and the instance file format, [`objectives`] the functions being
//! minimized together with their gradients, [`solvers`] the optimization
//! loops, [`verification`] independent reference checks, and [`harness`] the
//! run configuration and trace output used by the command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod solvers;
pub mod states;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::{HermitianMatrix, C64};
pub use objectives::{Alpha, Objective, ObjectiveKind};
pub use solvers::{ArmijoParams, DualNorm, PolyakParams, SolveTrace, SolverKind};
pub use states::{BipartiteState, CQEnsemble, DensityMatrix, Instance, InstanceKind, Seed};
