//! Ordinary (linear) Schrödinger propagation by Strang splitting:
//! half potential phase, kinetic phase in frequency space, half potential
//! phase.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{ComplexField, Grid, Potential, Spectral};
use crate::observe::{notify, Observer};

pub use crate::observe::packet_width;

/// Relative norm drift at which `evolve_linear` aborts.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Clone)]
pub struct LinearStepper {
    grid: Grid,
    potential: Potential,
    dt: f64,
    t: f64,
    spectral: Spectral,
    kinetic: Vec<Complex64>,
    // half-step potential phase, cached when V is static
    half_phase: Option<Vec<Complex64>>,
}

impl LinearStepper {
    pub fn new(potential: Potential, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let grid = *potential.grid();
        let spectral = Spectral::new(grid);
        let coef = grid.hbar() * dt / (2.0 * grid.mass());
        let kinetic = (0..grid.len())
            .map(|i| Complex64::from_polar(1.0, -coef * spectral.k2_at(i)))
            .collect();
        let mut stepper = Self {
            grid,
            potential,
            dt,
            t: 0.0,
            spectral,
            kinetic,
            half_phase: None,
        };
        if !stepper.potential.is_time_dependent() {
            stepper.half_phase = Some(stepper.potential_phase(0.0)?);
        }
        Ok(stepper)
    }

    /// Starts the stepper clock at `t0`.
    pub fn starting_at(mut self, t0: f64) -> Self {
        self.t = t0;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn kinetic_multipliers(&self) -> &[Complex64] {
        &self.kinetic
    }

    fn potential_phase(&self, t: f64) -> Result<Vec<Complex64>> {
        let v = self.potential.values_at(t)?;
        let coef = 0.5 * self.dt / self.grid.hbar();
        Ok(v.values()
            .iter()
            .map(|&vi| Complex64::from_polar(1.0, -coef * vi))
            .collect())
    }

    /// Advances ψ by one step in place and moves the clock by dt.
    pub fn step(&mut self, psi: &mut ComplexField) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::InvalidInput("ψ and stepper live on different grids".into()));
        }
        let owned;
        let half: &[Complex64] = match &self.half_phase {
            Some(h) => h,
            None => {
                // time-dependent V is sampled at the step midpoint
                owned = self.potential_phase(self.t + 0.5 * self.dt)?;
                &owned
            }
        };
        let buf = psi.values_mut();
        for (z, h) in buf.iter_mut().zip(half) {
            *z *= h;
        }
        self.spectral.forward(buf);
        for (z, k) in buf.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.spectral.inverse(buf);
        for (z, h) in buf.iter_mut().zip(half) {
            *z *= h;
        }
        self.t += self.dt;
        Ok(())
    }
}

/// One Strang step; returns the new ψ.
pub fn step_linear(psi: &ComplexField, stepper: &mut LinearStepper) -> Result<ComplexField> {
    let mut out = psi.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// Applies `n_steps` steps, notifying observers at their cadence (step 0
/// included). Aborts when the norm drifts by more than 1e-8 relative.
pub fn evolve_linear(
    psi: &ComplexField,
    stepper: &mut LinearStepper,
    n_steps: usize,
    observers: &mut [&mut dyn Observer<ComplexField>],
) -> Result<ComplexField> {
    let mut state = psi.clone();
    let norm0 = state.norm();
    notify(observers, 0, stepper.time(), &state)?;
    for step in 1..=n_steps {
        stepper.step(&mut state)?;
        let drift = (state.norm() - norm0).abs() / norm0;
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(Error::NormDrift {
                time: stepper.time(),
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        notify(observers, step, stepper.time(), &state)?;
    }
    Ok(state)
}
