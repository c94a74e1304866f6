//! Solvers and certification machinery for generalized inverse mixed
//! variational inequality problems: continuous-time dynamical systems with
//! finite-, fixed- and predefined-time stability, their forward-Euler
//! discretizations, and settling-time bound verification.
//!
//! The problem: find `wbar` with `F(wbar) in Omega` and
//! `<h(wbar), v - F(wbar)> + g(v) - g(F(wbar)) >= 0` for all `v in Omega`.
//! Solutions coincide with zeros of the residual map
//! `Xi(w) = F(w) - prox^{gamma g}_Omega(F(w) - h(w))`, which the flows
//! drive to zero.

// `!(x > 0.0)` in validations is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod flow;
pub mod iterate;
pub mod model;
pub mod plot;
pub mod proxcat;
pub mod regimes;
pub mod registry;
pub mod residual;
pub mod shell;

pub use error::{Error, Result};
pub use model::{builtin_example1, load_problem, ProblemInstance, Vector};
