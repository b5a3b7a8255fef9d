//! Polar form ψ = R e^{iS/ħ}, the velocity field ∇S/m and the quantum
//! potential Q = -(ħ²/2m) ∇²R / R.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fd::FiniteDifference;
use super::field::{ComplexField, HasDensity, ScalarField};
use super::grid::{Grid, Point};
use super::spectral::Spectral;
use crate::error::{Error, Result};

/// Relative density floor below which phase and velocity are undefined.
pub const DEFAULT_RHO_FLOOR_REL: f64 = 1e-12;

/// `1e-12 · max ρ`.
pub fn default_rho_floor(rho: &ScalarField) -> f64 {
    DEFAULT_RHO_FLOOR_REL * rho.max().max(f64::MIN_POSITIVE)
}

/// How the action S of a [`PolarPair`] is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// S evolves smoothly (classical Hamilton–Jacobi output); its
    /// gradient is taken directly.
    Unwrapped,
    /// S is ħ·arg ψ in (-πħ, πħ]; `mask[i]` marks points where ψ was
    /// below the density floor and S is undefined (stored as 0).
    Wrapped { mask: Vec<bool> },
}

/// The classical state (R, S): amplitude R ≥ 0 and action S.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPair {
    r: ScalarField,
    s: ScalarField,
    phase: Phase,
}

impl PolarPair {
    /// Builds an unwrapped pair; fails on negative R or mismatched grids.
    pub fn new(r: ScalarField, s: ScalarField) -> Result<Self> {
        if r.grid() != s.grid() {
            return Err(Error::InvalidInput("R and S live on different grids".into()));
        }
        if let Some((index, &value)) = r.values().iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeAmplitude { index, value });
        }
        Ok(Self {
            r,
            s,
            phase: Phase::Unwrapped,
        })
    }

    pub(crate) fn from_parts(r: ScalarField, s: ScalarField, phase: Phase) -> Self {
        Self { r, s, phase }
    }

    pub fn r(&self) -> &ScalarField {
        &self.r
    }

    pub fn s(&self) -> &ScalarField {
        &self.s
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn grid(&self) -> &Grid {
        self.r.grid()
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.r, self.s)
    }

    /// ∫ R² dV.
    pub fn norm(&self) -> f64 {
        self.r.values().iter().map(|v| v * v).sum::<f64>() * self.grid().cell_volume()
    }

    /// Scales R by `c` (S untouched).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::InvalidInput("amplitude scale must be nonnegative".into()));
        }
        Ok(Self {
            r: self.r.scaled(c),
            s: self.s.clone(),
            phase: self.phase.clone(),
        })
    }

    pub fn compose(&self) -> ComplexField {
        compose(self)
    }

    /// ∇S per axis, and the mask of points where it is undefined.
    pub fn momentum(&self) -> (Vec<ScalarField>, Vec<bool>) {
        match &self.phase {
            Phase::Unwrapped => {
                let grad = FiniteDifference::new(*self.grid()).gradient(&self.s);
                (grad, vec![false; self.grid().len()])
            }
            Phase::Wrapped { .. } => {
                let psi = self.compose();
                let floor = default_rho_floor(&psi.density());
                let v = velocity_field(&psi, floor);
                let m = self.grid().mass();
                let p = v.components.iter().map(|c| c.scaled(m)).collect();
                (p, v.mask)
            }
        }
    }
}

impl HasDensity for PolarPair {
    fn density(&self) -> ScalarField {
        self.r.square()
    }
}

/// ψ = R e^{iS/ħ} pointwise.
pub fn compose(p: &PolarPair) -> ComplexField {
    let hbar = p.grid().hbar();
    let values = p
        .r
        .values()
        .iter()
        .zip(p.s.values())
        .map(|(&r, &s)| Complex64::from_polar(r, s / hbar))
        .collect();
    ComplexField::from_raw(*p.grid(), values)
}

/// R = |ψ|, S = ħ arg ψ in (-πħ, πħ]; S is masked where |ψ|² < `rho_floor`.
pub fn decompose(psi: &ComplexField, rho_floor: f64) -> Result<PolarPair> {
    if !(rho_floor > 0.0) {
        return Err(Error::InvalidInput(format!("rho_floor must be positive, got {rho_floor}")));
    }
    let grid = *psi.grid();
    let hbar = grid.hbar();
    let len = grid.len();
    let mut r = Vec::with_capacity(len);
    let mut s = Vec::with_capacity(len);
    let mut mask = Vec::with_capacity(len);
    for z in psi.values() {
        r.push(z.norm());
        if z.norm_sqr() < rho_floor {
            s.push(0.0);
            mask.push(true);
        } else {
            let mut arg = z.arg();
            // atan2(-0.0, -1.0) = -π; keep the half-open branch (-π, π]
            if arg <= -PI {
                arg = PI;
            }
            s.push(hbar * arg);
            mask.push(false);
        }
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::EmptyField { floor: rho_floor });
    }
    Ok(PolarPair::from_parts(
        ScalarField::from_raw(grid, r),
        ScalarField::from_raw(grid, s),
        Phase::Wrapped { mask },
    ))
}

/// Velocity components with the node mask.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub components: Vec<ScalarField>,
    /// `true` where ρ is below the floor and the velocity is undefined.
    pub mask: Vec<bool>,
}

/// ∇S/m computed as (ħ/m) Im(ψ* ∇ψ) / |ψ|², without unwrapping the phase.
pub fn velocity_field(psi: &ComplexField, rho_floor: f64) -> VelocityField {
    velocity_field_with(&Spectral::new(*psi.grid()), psi, rho_floor)
}

pub fn velocity_field_with(spectral: &Spectral, psi: &ComplexField, rho_floor: f64) -> VelocityField {
    let grid = *psi.grid();
    let coef = grid.hbar() / grid.mass();
    let grads = spectral.gradient_complex(psi);
    let mask: Vec<bool> = psi.values().iter().map(|z| z.norm_sqr() < rho_floor).collect();
    let components = grads
        .iter()
        .map(|g| {
            let values = psi
                .values()
                .iter()
                .zip(g.values())
                .zip(&mask)
                .map(|((z, dz), &masked)| {
                    if masked {
                        0.0
                    } else {
                        coef * (z.conj() * dz).im / z.norm_sqr()
                    }
                })
                .collect();
            ScalarField::from_raw(grid, values)
        })
        .collect();
    VelocityField { components, mask }
}

/// Q = -(ħ²/2m) ∇²R / R with a spectral Laplacian; zero where R² < `rho_floor`.
pub fn quantum_potential(r: &ScalarField, rho_floor: f64) -> Result<ScalarField> {
    if let Some((index, &value)) = r.values().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::NegativeAmplitude { index, value });
    }
    let grid = *r.grid();
    let coef = -grid.hbar() * grid.hbar() / (2.0 * grid.mass());
    let lap = Spectral::new(grid).laplacian(r);
    Ok(r.zip_map(&lap, |rv, l| if rv * rv < rho_floor { 0.0 } else { coef * l / rv }))
}

/// Normalized Gaussian amplitude whose density ρ = R² has standard
/// deviation `width` on every axis.
pub fn gaussian_amplitude(grid: Grid, center: Point, width: f64) -> Result<ScalarField> {
    if !(width > 0.0) {
        return Err(Error::InvalidInput(format!("width must be positive, got {width}")));
    }
    let dim = grid.dim();
    let norm = (2.0 * PI * width * width).powf(-0.25 * dim as f64);
    ScalarField::from_fn(grid, |p| {
        let r2: f64 = (0..dim).map(|a| grid.min_image(p[a] - center[a]).powi(2)).sum();
        norm * (-r2 / (4.0 * width * width)).exp()
    })
}

/// S = p·x (not wrapped).
pub fn plane_wave_action(grid: Grid, momentum: Point) -> ScalarField {
    let dim = grid.dim();
    ScalarField::from_raw(
        grid,
        (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                (0..dim).map(|a| momentum[a] * p[a]).sum()
            })
            .collect(),
    )
}
