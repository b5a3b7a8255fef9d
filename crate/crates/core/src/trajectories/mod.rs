//! Particle trajectories along ∇S/m, ensembles sampled from ρ, and the
//! analyses built on them (crest tracking, two-position momentum).

mod analysis;
mod sampling;
mod velocity;

pub use analysis::{
    crest_track, ensemble_summary, histogram_l1, indirect_momentum, write_summary_csv, write_trajectories_csv,
    CrestWindow, SummaryRow, HISTOGRAM_BINS,
};
pub use sampling::sample_positions;
pub use velocity::{AnalyticVelocity, VelocityFrames, VelocitySource};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Point, ScalarField};

/// Positions of one particle on an increasing time base.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Point>,
    /// Time at which the particle entered a node region, if it did; the
    /// samples stop there.
    pub aborted: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<Point> {
        self.positions.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub trajectories: Vec<Trajectory>,
    pub seed: u64,
    /// Shared time base (the recorded times).
    pub times: Vec<f64>,
}

impl TrajectoryEnsemble {
    /// Number of members that entered a node region.
    pub fn aborted(&self) -> usize {
        self.trajectories.iter().filter(|t| t.aborted.is_some()).count()
    }

    pub fn aborted_fraction(&self) -> f64 {
        self.aborted() as f64 / self.trajectories.len().max(1) as f64
    }

    /// Positions of the non-aborted members at recorded time index `k`.
    pub fn positions_at(&self, k: usize) -> Vec<Point> {
        self.trajectories
            .iter()
            .filter(|t| t.aborted.is_none())
            .filter_map(|t| t.positions.get(k).copied())
            .collect()
    }
}

/// Step count and size covering [t0, t1] with steps no longer than `dt`.
fn time_steps(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput(format!("bad time span [{t0}, {t1}] with dt {dt}")));
    }
    let n = (((t1 - t0) / dt) - 1e-9).ceil().max(0.0) as usize;
    Ok((n, if n == 0 { 0.0 } else { (t1 - t0) / n as f64 }))
}

fn rk4_step(source: &dyn VelocitySource, x: Point, t: f64, h: f64) -> Result<Point> {
    let add = |a: Point, s: f64, v: [f64; 2]| [a[0] + s * v[0], a[1] + s * v[1]];
    let k1 = source.velocity(x, t)?;
    let k2 = source.velocity(add(x, 0.5 * h, k1), t + 0.5 * h)?;
    let k3 = source.velocity(add(x, 0.5 * h, k2), t + 0.5 * h)?;
    let k4 = source.velocity(add(x, h, k3), t + h)?;
    let mut out = x;
    for a in 0..2 {
        out[a] += h / 6.0 * (k1[a] + 2.0 * (k2[a] + k3[a]) + k4[a]);
    }
    Ok(out)
}

/// Integrates dx/dt = v(x, t) from (x0, t0) to t1 with RK4, recording
/// every `record_every`-th step and the final one. Positions are wrapped
/// into the periodic box. A node region yields a trajectory truncated at
/// that time with `aborted` set.
fn integrate(
    x0: Point,
    source: &dyn VelocitySource,
    t0: f64,
    n: usize,
    h: f64,
    record_every: usize,
) -> Trajectory {
    let grid = *source.grid();
    let mut x = grid.wrap_point(x0);
    let mut traj = Trajectory {
        times: vec![t0],
        positions: vec![x],
        aborted: None,
    };
    for step in 1..=n {
        let t = t0 + (step - 1) as f64 * h;
        match rk4_step(source, x, t, h) {
            Ok(next) => x = grid.wrap_point(next),
            Err(_) => {
                traj.aborted = Some(t);
                return traj;
            }
        }
        if step % record_every == 0 || step == n {
            traj.times.push(t0 + step as f64 * h);
            traj.positions.push(x);
        }
    }
    traj
}

/// One trajectory sampled at every step.
pub fn integrate_trajectory(
    x0: Point,
    source: &dyn VelocitySource,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    let grid = source.grid();
    if !grid.contains(x0) {
        return Err(Error::InvalidInput(format!("start point {x0:?} outside the domain")));
    }
    let (start, end) = source.time_range();
    let slack = range_slack(start, end);
    if t0 < start - slack || t1 > end + slack {
        return Err(Error::OutOfRange {
            time: if t0 < start { t0 } else { t1 },
            start,
            end,
        });
    }
    let (n, h) = time_steps(t0, t1, dt)?;
    let traj = integrate(x0, source, t0, n, h, 1);
    match traj.aborted {
        Some(time) => Err(Error::NodeRegion { time }),
        None => Ok(traj),
    }
}

/// Samples `n` points from ρ₀ with `seed` and integrates them in parallel.
/// Every member records every `record_every` steps (and the last step).
#[allow(clippy::too_many_arguments)]
pub fn propagate_ensemble(
    rho0: &ScalarField,
    n: usize,
    source: &dyn VelocitySource,
    t0: f64,
    t1: f64,
    dt: f64,
    seed: u64,
    record_every: usize,
) -> Result<TrajectoryEnsemble> {
    if n == 0 {
        return Err(Error::InvalidInput("ensemble size must be at least 1".into()));
    }
    if rho0.grid() != source.grid() {
        return Err(Error::InvalidInput("density and velocity live on different grids".into()));
    }
    let (start, end) = source.time_range();
    let slack = range_slack(start, end);
    if t0 < start - slack || t1 > end + slack {
        return Err(Error::OutOfRange {
            time: if t0 < start { t0 } else { t1 },
            start,
            end,
        });
    }
    let (steps, h) = time_steps(t0, t1, dt)?;
    let record_every = record_every.max(1);
    let starts = sample_positions(rho0, n, seed)?;
    let trajectories: Vec<Trajectory> = starts
        .par_iter()
        .map(|&x0| integrate(x0, source, t0, steps, h, record_every))
        .collect();
    let mut times = vec![t0];
    for step in 1..=steps {
        if step % record_every == 0 || step == steps {
            times.push(t0 + step as f64 * h);
        }
    }
    Ok(TrajectoryEnsemble {
        trajectories,
        seed,
        times,
    })
}

/// Tolerance for clock drift between a recorded source and the requested span.
pub(crate) fn range_slack(start: f64, end: f64) -> f64 {
    1e-9 * (end - start).abs().max(1.0)
}
