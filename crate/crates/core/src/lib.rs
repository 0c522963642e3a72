//! Elastic graphs above a symmetric cone obstacle.
//!
//! The minimizer of the graph bending energy
//! `W(u) = ∫₀¹ u″² (1+u′²)^(−5/2) dx` among symmetric functions with
//! `u(0) = u(1) = 0` lying above a cone obstacle ψ exists exactly when
//! `ψ(½) < c* = 2/c₀`. This crate computes it by a shooting method with
//! closed-form quadrature, runs the obstacle-constrained gradient flow, and
//! reconstructs the elliptic limit curves obtained as the initial slope
//! grows without bound. Independent brute-force checks live in [`oracle`].

pub mod curves;
pub mod error;
pub mod flow;
pub mod grid;
pub mod obstacle;
pub mod oracle;
pub mod shooting;
pub mod specfun;

pub use error::{Error, Result};
