//! Classical evolution of (R, S): Hamilton–Jacobi for S and the continuity
//! equation, linear in R, transported along the characteristics of ∇S/m.

mod caustic;
mod continuity;
mod hj;
mod superpose;


pub use caustic::CausticReport;
pub use continuity::step_continuity;
pub use hj::{caustic_monitor, step_hj};
pub use superpose::{superpose_nonoverlapping, OVERLAP_FLOOR_REL};


use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::fields::{FiniteDifference, Grid, Phase, PolarPair, Potential, ScalarField};
use crate::observe::{notify, Observer};

/// Default bound on max|∇²S|·dt/m.
pub const DEFAULT_CAUSTIC_THRESHOLD: f64 = 0.5;
/// Default stencil width for semi-Lagrangian interpolation.
pub const DEFAULT_INTERP_POINTS: usize = 8;
/// Default per-step budget for mass removed by clamping R at zero.
pub const DEFAULT_CLAMP_BUDGET: f64 = 1e-6;

/// Running record of negative-R clamping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClampStats {
    /// Continuity steps taken.
    pub steps: usize,
    /// Points clamped, summed over steps.
    pub events: usize,
    /// Largest clamped fraction of ∫R² in a single step.
    pub max_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct ClassicalStepper {
    grid: Grid,
    potential: Potential,
    dt: f64,
    t: f64,
    caustic_threshold: f64,
    interp_points: usize,
    clamp_budget: f64,
    fd: FiniteDifference,
    // V sampled once when it does not depend on time
    static_v: Option<ScalarField>,
    clamp: ClampStats,
}

impl ClassicalStepper {
    pub fn new(potential: Potential, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let grid = *potential.grid();
        let static_v = if potential.is_time_dependent() {
            None
        } else {
            Some(potential.values_at(0.0)?)
        };
        Ok(Self {
            grid,
            fd: FiniteDifference::new(grid),
            potential,
            dt,
            t: 0.0,
            caustic_threshold: DEFAULT_CAUSTIC_THRESHOLD,
            interp_points: DEFAULT_INTERP_POINTS,
            clamp_budget: DEFAULT_CLAMP_BUDGET,
            static_v,
            clamp: ClampStats::default(),
        })
    }

    pub fn with_caustic_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::InvalidInput(format!("caustic threshold must be positive, got {threshold}")));
        }
        self.caustic_threshold = threshold;
        Ok(self)
    }

    /// Stencil width (4, 6 or 8 points) for the departure-point interpolation.
    pub fn with_interpolation_points(mut self, points: usize) -> Result<Self> {
        if !matches!(points, 4 | 6 | 8) {
            return Err(Error::InvalidInput(format!("interpolation points must be 4, 6 or 8, got {points}")));
        }
        self.interp_points = points;
        Ok(self)
    }

    pub fn with_clamp_budget(mut self, budget: f64) -> Result<Self> {
        if !(budget >= 0.0) {
            return Err(Error::InvalidInput(format!("clamp budget must be nonnegative, got {budget}")));
        }
        self.clamp_budget = budget;
        Ok(self)
    }

    pub fn starting_at(mut self, t0: f64) -> Self {
        self.t = t0;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn caustic_threshold(&self) -> f64 {
        self.caustic_threshold
    }

    pub fn interpolation_points(&self) -> usize {
        self.interp_points
    }

    pub fn clamp_stats(&self) -> ClampStats {
        self.clamp
    }

    pub(crate) fn fd(&self) -> &FiniteDifference {
        &self.fd
    }

    pub(crate) fn potential_at(&self, t: f64) -> Result<Cow<'_, ScalarField>> {
        match &self.static_v {
            Some(v) => Ok(Cow::Borrowed(v)),
            None => Ok(Cow::Owned(self.potential.values_at(t)?)),
        }
    }

    pub(crate) fn record_clamp(&mut self, events: usize, fraction: f64) {
        self.clamp.steps += 1;
        self.clamp.events += events;
        self.clamp.max_fraction = self.clamp.max_fraction.max(fraction);
    }

    pub(crate) fn advance_clock(&mut self) {
        self.t += self.dt;
    }

    pub(crate) fn clamp_budget(&self) -> f64 {
        self.clamp_budget
    }

    fn check_grid(&self, f: &ScalarField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::InvalidInput("field and stepper live on different grids".into()));
        }
        Ok(())
    }
}

/// One Strang step: half Hamilton–Jacobi step, continuity with the
/// midpoint S, half Hamilton–Jacobi step.
pub fn step_classical(state: &PolarPair, stepper: &mut ClassicalStepper) -> Result<PolarPair> {
    if !matches!(state.phase(), Phase::Unwrapped) {
        return Err(Error::InvalidInput(
            "classical evolution needs an unwrapped S (decompose output is wrapped)".into(),
        ));
    }
    stepper.check_grid(state.r())?;
    let t0 = stepper.t;
    let half = 0.5 * stepper.dt;
    let s_mid = hj::hj_advance(stepper, state.s(), t0, half)?;
    let r_new = continuity::transport(stepper, state.r(), &s_mid, t0 + half)?;
    let s_new = hj::hj_advance(stepper, &s_mid, t0 + half, half)?;
    stepper.t = t0 + stepper.dt;
    PolarPair::new(r_new, s_new)
}

/// Applies `n_steps` classical steps with observers at their cadence
/// (step 0 included). A caustic stops the run with `Error::Caustic`.
pub fn evolve_classical(
    state: &PolarPair,
    stepper: &mut ClassicalStepper,
    n_steps: usize,
    observers: &mut [&mut dyn Observer<PolarPair>],
) -> Result<PolarPair> {
    let mut cur = state.clone();
    notify(observers, 0, stepper.time(), &cur)?;
    for step in 1..=n_steps {
        cur = step_classical(&cur, stepper)?;
        notify(observers, step, stepper.time(), &cur)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian_amplitude, plane_wave_action};

    #[test]
    fn builder_validates() {
        let g = Grid::line(64, 10.0).unwrap();
        let st = ClassicalStepper::new(Potential::zero(g), 0.01).unwrap();
        assert!(st.clone().with_caustic_threshold(0.0).is_err());
        assert!(st.clone().with_interpolation_points(5).is_err());
        assert!(st.clone().with_clamp_budget(-1.0).is_err());
        assert!(ClassicalStepper::new(Potential::zero(g), -0.1).is_err());
    }

    #[test]
    fn static_state_unchanged() {
        let g = Grid::line(128, 20.0).unwrap();
        let r = gaussian_amplitude(g, [1.0, 0.0], 0.7).unwrap();
        let state = PolarPair::new(r, ScalarField::zeros(g)).unwrap();
        let mut st = ClassicalStepper::new(Potential::zero(g), 0.05).unwrap();
        let out = evolve_classical(&state, &mut st, 10, &mut []).unwrap();
        assert!(out.r().max_abs_diff(state.r()) < 1e-14);
        assert!(out.s().max_abs_diff(state.s()) == 0.0);
        assert!((st.time() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrapped_phase() {
        let g = Grid::line(64, 20.0).unwrap();
        let r = gaussian_amplitude(g, [0.0; 2], 1.0).unwrap();
        let psi = PolarPair::new(r, plane_wave_action(g, [1.0, 0.0])).unwrap().compose();
        let wrapped = crate::fields::decompose(&psi, 1e-20).unwrap();
        let mut st = ClassicalStepper::new(Potential::zero(g), 0.01).unwrap();
        assert!(step_classical(&wrapped, &mut st).is_err());
    }
}
