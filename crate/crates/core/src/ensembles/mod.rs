//! Density matrices over positive bases, Ehrenfest diagnostics and
//! classical phase-space ensembles.

mod density;
mod ehrenfest;
mod phase_space;

pub use density::{
    exchange_density, expect_diagonal, mixed_density, pure_density, DensityMatrix, ExchangeDensity, PositiveBasis,
    EXCHANGE_TOL, MAX_BASIS_SIZE, ORTHONORMAL_TOL, TRACE_TOL,
};
pub use ehrenfest::{ehrenfest_residuals, EhrenfestRow, MeanVelocity};
pub use phase_space::{
    evolve_characteristics, phase_space_average, phase_space_from_pure, phase_space_from_r, PhaseSpaceEnsemble,
    PhaseSpacePoint,
};
