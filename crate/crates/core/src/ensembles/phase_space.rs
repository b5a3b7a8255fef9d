//! Classical phase-space ensembles {w, x, p} built from polar states.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{interpolate_many, Boundary, HasDensity, Point, PolarPair, Potential, ScalarField};
use crate::trajectories::sample_positions;

/// Stream used for momenta, kept apart from the position stream of the same seed.
const MOMENTUM_STREAM: u64 = 1;
/// Stencil width when reading ∇S at a sample.
const MOMENTUM_STENCIL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub position: Point,
    pub momentum: [f64; 2],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct PhaseSpaceEnsemble {
    pub dim: usize,
    pub points: Vec<PhaseSpacePoint>,
    pub normalized: bool,
}

impl PhaseSpaceEnsemble {
    fn uniform(dim: usize, samples: impl Iterator<Item = (Point, [f64; 2])>, n: usize) -> Self {
        let w = 1.0 / n as f64;
        let points = samples
            .map(|(position, momentum)| PhaseSpacePoint {
                position,
                momentum,
                weight: w,
            })
            .collect();
        Self {
            dim,
            points,
            normalized: true,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// CSV with header `weight,x[,y],p_x[,p_y]`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = if self.dim == 1 { "weight,x,p_x\n" } else { "weight,x,y,p_x,p_y\n" };
        let mut body = String::from(header);
        for p in &self.points {
            if self.dim == 1 {
                body.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p.weight, p.position[0], p.momentum[0]));
            } else {
                body.push_str(&format!(
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                    p.weight, p.position[0], p.position[1], p.momentum[0], p.momentum[1]
                ));
            }
        }
        w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }
}

/// Positions drawn from R², each carrying exactly the momentum ∇S at its
/// position (interpolated from the gridded gradient).
pub fn phase_space_from_pure(state: &PolarPair, n: usize, seed: u64) -> Result<PhaseSpaceEnsemble> {
    let grid = *state.grid();
    let rho = state.density();
    let positions = sample_positions(&rho, n, seed)?;
    let (p, mask) = state.momentum();
    let fields: Vec<&[f64]> = p.iter().map(|f| f.values()).collect();
    let mut samples = Vec::with_capacity(n);
    for x in positions {
        if mask[grid.nearest_index(x)] {
            return Err(Error::Sampling(format!("sample {x:?} fell where ∇S is undefined")));
        }
        let mut out = [0.0; 2];
        interpolate_many(&grid, &fields, x, MOMENTUM_STENCIL, Boundary::Clamped, &mut out[..fields.len()]);
        samples.push((x, out));
    }
    Ok(PhaseSpaceEnsemble::uniform(grid.dim(), samples.into_iter(), n))
}

/// Positions drawn from R², momenta uniform and independent in `p_box`
/// (one `(lo, hi)` pair per axis). A zero-width axis pins the momentum.
pub fn phase_space_from_r(r: &ScalarField, p_box: &[(f64, f64)], n: usize, seed: u64) -> Result<PhaseSpaceEnsemble> {
    let grid = *r.grid();
    let dim = grid.dim();
    if p_box.len() != dim {
        return Err(Error::InvalidInput(format!("momentum box has {} axes, grid has {dim}", p_box.len())));
    }
    if let Some(&(lo, hi)) = p_box.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidInput(format!("momentum box [{lo}, {hi}] is empty or unbounded")));
    }
    let positions = sample_positions(&r.square(), n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MOMENTUM_STREAM);
    let samples: Vec<(Point, [f64; 2])> = positions
        .into_iter()
        .map(|x| {
            let mut p = [0.0; 2];
            for (a, &(lo, hi)) in p_box.iter().enumerate() {
                p[a] = lo + (hi - lo) * rng.random::<f64>();
            }
            (x, p)
        })
        .collect();
    Ok(PhaseSpaceEnsemble::uniform(dim, samples.into_iter(), n))
}

/// Σ wᵢ O(xᵢ, pᵢ) over a normalized ensemble.
pub fn phase_space_average(e: &PhaseSpaceEnsemble, o: impl Fn(Point, [f64; 2]) -> f64) -> Result<f64> {
    if !e.normalized {
        return Err(Error::InvalidInput("ensemble is not normalized".into()));
    }
    Ok(e.points.iter().map(|p| p.weight * o(p.position, p.momentum)).sum())
}

/// Moves every point along Hamilton's equations ẋ = p/m, ṗ = −∇V with RK4
/// from `t0` to `t1`. Positions are wrapped into the box.
pub fn evolve_characteristics(
    e: &PhaseSpaceEnsemble,
    potential: &Potential,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseSpaceEnsemble> {
    if !(dt > 0.0 && t1 >= t0) {
        return Err(Error::InvalidInput(format!("bad span [{t0}, {t1}] with dt={dt}")));
    }
    let grid = *potential.grid();
    let m = grid.mass();
    let steps = ((t1 - t0) / dt).round().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let rhs = |x: Point, p: [f64; 2], t: f64| {
        let g = potential.gradient(x, t);
        ([p[0] / m, p[1] / m], [-g[0], -g[1]])
    };
    let axpy = |a: [f64; 2], s: f64, b: [f64; 2]| [a[0] + s * b[0], a[1] + s * b[1]];
    let points = e
        .points
        .par_iter()
        .map(|pt| {
            let (mut x, mut p) = (pt.position, pt.momentum);
            for k in 0..steps {
                let t = t0 + k as f64 * h;
                let (k1x, k1p) = rhs(x, p, t);
                let (k2x, k2p) = rhs(axpy(x, 0.5 * h, k1x), axpy(p, 0.5 * h, k1p), t + 0.5 * h);
                let (k3x, k3p) = rhs(axpy(x, 0.5 * h, k2x), axpy(p, 0.5 * h, k2p), t + 0.5 * h);
                let (k4x, k4p) = rhs(axpy(x, h, k3x), axpy(p, h, k3p), t + h);
                for a in 0..2 {
                    x[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
                    p[a] += h / 6.0 * (k1p[a] + 2.0 * k2p[a] + 2.0 * k3p[a] + k4p[a]);
                }
                x = grid.wrap_point(x);
            }
            PhaseSpacePoint {
                position: x,
                momentum: p,
                weight: pt.weight,
            }
        })
        .collect();
    Ok(PhaseSpaceEnsemble {
        dim: e.dim,
        points,
        normalized: e.normalized,
    })
}
