//! Linear and classical Schrödinger dynamics side by side.
//!
//! The linear solver propagates ψ under the ordinary Schrödinger equation.
//! The classical solver propagates the polar pair (R, S) under the
//! classical Hamilton–Jacobi equation and the continuity equation written
//! as a linear operator on R, which together are equivalent to the
//! nonlinear Schrödinger equation with the quantum potential subtracted.
//! Around the two solvers sit trajectory integration along ∇S/m,
//! density-matrix and phase-space ensembles, and single-valuedness
//! (Bohr quantization) checks.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical_solver;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod fields;
pub mod linear_solver;
pub mod observe;
pub mod quantization;
pub mod trajectories;

pub use error::{Error, Result};
pub use fields::{ComplexField, Grid, HasDensity, PolarPair, Potential, ScalarField};
