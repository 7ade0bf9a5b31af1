//! Exact symbolic workbench for the equivalence algebra of the nonlinear wave
//! class `u_tt - u_xx = f(u, sigma)`, `sigma = u_t^2 - u_x^2`.
//!
//! The crate builds the (discretized) equivalence algebra both from its
//! printed coefficients and by machine derivation from point actions, checks
//! its commutator table and prolonged ranks, verifies differential invariants
//! of the algebra, and classifies concrete equations of the class by their
//! invariant signatures.

pub mod error;
pub mod exprcore;

pub use error::{Error, Result};
pub mod cli;
pub mod eqalgebra;
pub mod equivalence;
pub mod invariants;
pub mod jetspace;
pub mod linalg;
pub mod vfields;
