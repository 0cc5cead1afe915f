//! Compressed sensing over the quaternions.
//!
//! Sparse quaternion signals are recovered from few linear measurements by
//! `ℓ1` minimization. The crate provides the scalar and matrix algebra,
//! Gaussian measurement ensembles, the real (SOCP) embedding of the problem,
//! a first-order basis-pursuit solver, restricted isometry constants with the
//! associated error-bound constants, and an experiment harness for
//! phase-transition sweeps.

pub mod embedding;
pub mod error;
pub mod harness;
pub mod qlinalg;
pub mod quaternion;
pub mod random;
pub mod rip;
pub mod solver;

pub use error::{Error, Result};
pub use qlinalg::{QMatrix, QVector, SupportSet};
pub use quaternion::Quaternion;
pub use random::{RngStream, ScalarMode};
pub use solver::{solve, RecoveryProblem, SolveResult, SolveStatus, SolverParams};
