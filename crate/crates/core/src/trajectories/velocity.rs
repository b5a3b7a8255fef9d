//! Velocity fields queried by the trajectory integrator.

use crate::error::{Error, Result};
use crate::fields::{
    default_rho_floor, interpolate_many, velocity_field, Boundary, ComplexField, FiniteDifference, Grid, Phase,
    Point, PolarPair,
};
use crate::observe::Observer;

/// Stencil width for spatial interpolation of stored frames.
const FRAME_POINTS: usize = 4;

/// A time-indexed velocity field ∇S/m.
pub trait VelocitySource: Sync {
    fn grid(&self) -> &Grid;

    /// Closed time interval on which the field is defined.
    fn time_range(&self) -> (f64, f64);

    /// Velocity at `p`, time `t`. Fails in node regions and outside the
    /// time range.
    fn velocity(&self, p: Point, t: f64) -> Result<[f64; 2]>;
}

/// A velocity given in closed form, defined for all times.
pub struct AnalyticVelocity<F> {
    grid: Grid,
    field: F,
}

impl<F: Fn(Point, f64) -> [f64; 2] + Sync> AnalyticVelocity<F> {
    pub fn new(grid: Grid, field: F) -> Self {
        Self { grid, field }
    }
}

impl<F: Fn(Point, f64) -> [f64; 2] + Sync> VelocitySource for AnalyticVelocity<F> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn time_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn velocity(&self, p: Point, t: f64) -> Result<[f64; 2]> {
        Ok((self.field)(p, t))
    }
}

#[derive(Debug, Clone)]
struct Frame {
    t: f64,
    // one Vec per axis
    components: Vec<Vec<f64>>,
    mask: Vec<bool>,
}

/// Velocity frames stored from a solver run: 4-point Lagrange in space,
/// linear in time.
///
/// Frames from an unwrapped (classical) S use clamped stencils, since ∇S
/// need not be periodic; frames from ψ use periodic stencils.
#[derive(Debug, Clone)]
pub struct VelocityFrames {
    grid: Grid,
    boundary: Boundary,
    frames: Vec<Frame>,
    every: usize,
}

impl VelocityFrames {
    pub fn new(grid: Grid, boundary: Boundary) -> Self {
        Self {
            grid,
            boundary,
            frames: Vec::new(),
            every: 1,
        }
    }

    /// Sets the observer cadence used when the frames are filled from an
    /// `evolve_*` loop.
    pub fn every(mut self, every: usize) -> Self {
        self.every = every.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    /// Appends a frame; times must increase strictly.
    pub fn push(&mut self, t: f64, components: Vec<Vec<f64>>, mask: Vec<bool>) -> Result<()> {
        if let Some(last) = self.frames.last() {
            if !(t > last.t) {
                return Err(Error::InvalidInput(format!("frame time {t} does not follow {}", last.t)));
            }
        }
        if components.len() != self.grid.dim()
            || components.iter().any(|c| c.len() != self.grid.len())
            || mask.len() != self.grid.len()
        {
            return Err(Error::InvalidInput("velocity frame does not match the grid".into()));
        }
        self.frames.push(Frame { t, components, mask });
        Ok(())
    }

    /// Frame from a classical state: ∇S/m by finite differences, or the
    /// ψ-based velocity when S is wrapped.
    pub fn push_state(&mut self, t: f64, state: &PolarPair) -> Result<()> {
        match state.phase() {
            Phase::Unwrapped => {
                let m = self.grid.mass();
                let comps = FiniteDifference::new(self.grid)
                    .gradient(state.s())
                    .into_iter()
                    .map(|g| g.into_values().into_iter().map(|v| v / m).collect())
                    .collect();
                self.push(t, comps, vec![false; self.grid.len()])
            }
            Phase::Wrapped { .. } => self.push_wavefunction(t, &state.compose()),
        }
    }

    /// Frame from ψ: (ħ/m) Im(ψ*∇ψ)/|ψ|², masked below the default floor.
    pub fn push_wavefunction(&mut self, t: f64, psi: &ComplexField) -> Result<()> {
        let floor = default_rho_floor(&psi.density());
        let v = velocity_field(psi, floor);
        let comps = v.components.into_iter().map(|c| c.into_values()).collect();
        self.push(t, comps, v.mask)
    }

    fn at_frame(&self, k: usize, p: Point, out: &mut [f64; 2]) -> Result<()> {
        let f = &self.frames[k];
        if f.mask[self.grid.nearest_index(p)] {
            return Err(Error::NodeRegion { time: f.t });
        }
        let refs: Vec<&[f64]> = f.components.iter().map(|c| c.as_slice()).collect();
        let mut vals = [0.0; 2];
        interpolate_many(&self.grid, &refs, p, FRAME_POINTS, self.boundary, &mut vals);
        *out = vals;
        Ok(())
    }
}

impl VelocitySource for VelocityFrames {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn time_range(&self) -> (f64, f64) {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => (f64::NAN, f64::NAN),
        }
    }

    fn velocity(&self, p: Point, t: f64) -> Result<[f64; 2]> {
        let (start, end) = self.time_range();
        let slack = super::range_slack(start, end);
        if self.frames.is_empty() || t < start - slack || t > end + slack {
            return Err(Error::OutOfRange { time: t, start, end });
        }
        let k = self.frames.partition_point(|f| f.t <= t).clamp(1, self.frames.len()) - 1;
        let mut a = [0.0; 2];
        self.at_frame(k, p, &mut a)?;
        if k + 1 == self.frames.len() {
            return Ok(a);
        }
        let mut b = [0.0; 2];
        self.at_frame(k + 1, p, &mut b)?;
        let w = ((t - self.frames[k].t) / (self.frames[k + 1].t - self.frames[k].t)).clamp(0.0, 1.0);
        Ok([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])])
    }
}

impl Observer<PolarPair> for VelocityFrames {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, _step: usize, t: f64, state: &PolarPair) -> Result<()> {
        self.push_state(t, state)
    }
}

impl Observer<ComplexField> for VelocityFrames {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, _step: usize, t: f64, state: &ComplexField) -> Result<()> {
        self.push_wavefunction(t, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{plane_wave_action, ScalarField};

    #[test]
    fn linear_in_time_between_frames() {
        let g = Grid::line(32, 8.0).unwrap();
        let mut f = VelocityFrames::new(g, Boundary::Clamped);
        f.push(0.0, vec![vec![1.0; 32]], vec![false; 32]).unwrap();
        f.push(2.0, vec![vec![3.0; 32]], vec![false; 32]).unwrap();
        assert!((f.velocity([0.3, 0.0], 0.5).unwrap()[0] - 1.5).abs() < 1e-14);
        assert!(f.velocity([0.3, 0.0], 2.5).is_err());
        assert!(f.push(1.0, vec![vec![0.0; 32]], vec![false; 32]).is_err());
    }

    #[test]
    fn masked_points_are_node_regions() {
        let g = Grid::line(32, 8.0).unwrap();
        let mut f = VelocityFrames::new(g, Boundary::Periodic);
        let mut mask = vec![false; 32];
        mask[g.nearest_index([1.0, 0.0])] = true;
        f.push(0.0, vec![vec![0.0; 32]], mask).unwrap();
        assert!(matches!(f.velocity([1.0, 0.0], 0.0), Err(Error::NodeRegion { .. })));
        assert!(f.velocity([-1.0, 0.0], 0.0).is_ok());
    }

    #[test]
    fn state_frames_use_gradient_over_mass() {
        let g = Grid::line(64, 10.0).unwrap().with_units(1.0, 2.0).unwrap();
        let st = PolarPair::new(ScalarField::constant(g, 1.0), plane_wave_action(g, [3.0, 0.0])).unwrap();
        let mut f = VelocityFrames::new(g, Boundary::Clamped);
        f.push_state(0.0, &st).unwrap();
        assert!((f.velocity([4.9, 0.0], 0.0).unwrap()[0] - 1.5).abs() < 1e-10);
    }
}
