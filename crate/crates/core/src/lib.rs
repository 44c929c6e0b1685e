//! Greedy joint sparse recovery from multiple measurement vectors, with
//! exact restricted isometry constants, recovery guarantees under sensing
//! and measurement perturbations, and a seeded Monte Carlo harness.
//!
//! The model is `Y = ΦX` with `X` jointly `k`-sparse (at most `k` nonzero
//! rows). [`solver::somp_solve`] recovers `X` greedily. [`rip::ric_exact`]
//! computes `δ_k` by enumeration and [`guarantees::check_guarantee`] decides
//! whether the sufficient condition for support recovery holds for given
//! perturbation levels.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod guarantees;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod perturb;
pub mod rip;
pub mod solver;

pub use error::{Error, Result};
pub use model::{MeasurementSet, SensingMatrix, SignalMatrix, SupportSet};
pub use solver::{solve_perturbed, somp_solve, RecoveryResult, SolverOptions};
