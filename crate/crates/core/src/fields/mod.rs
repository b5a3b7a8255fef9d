//! Grids, sampled fields, polar composition and spectral operators.

mod fd;
mod field;
mod grid;
mod interp;
pub mod io;
mod polar;
mod potential;
mod spectral;

pub use fd::{fornberg_weights, FiniteDifference};
pub use field::{ComplexField, HasDensity, ScalarField};
pub use grid::{Grid, Point};
pub use interp::{interpolate, interpolate_many, Boundary};
pub use polar::{
    compose, decompose, default_rho_floor, gaussian_amplitude, plane_wave_action, quantum_potential,
    velocity_field, velocity_field_with, Phase, PolarPair, VelocityField, DEFAULT_RHO_FLOOR_REL,
};
pub use potential::{Potential, PotentialFn, PotentialKind};
pub use spectral::{gradient, laplacian, norm, Spectral};
