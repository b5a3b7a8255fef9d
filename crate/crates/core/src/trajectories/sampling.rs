//! Seeded sampling of initial positions from a gridded density.
//!
//! ρ is read as piecewise constant on the grid cells. 1D uses the inverse
//! CDF over cells, 2D uses rejection inside the bounding box of the
//! support. Sampling is sequential on one ChaCha8 stream, so a seed fixes
//! the sample bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{Point, ScalarField};

/// Proposals allowed per accepted 2D sample.
const MAX_ATTEMPTS: usize = 1_000_000;
/// Cells below this fraction of the peak are left out of the 2D proposal box.
const SUPPORT_REL: f64 = 1e-14;

pub fn sample_positions(rho: &ScalarField, n: usize, seed: u64) -> Result<Vec<Point>> {
    if let Some(i) = rho.values().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Sampling(format!("density is negative or non-finite at index {i}")));
    }
    if !(rho.integral() > 0.0) {
        return Err(Error::Sampling("density has zero norm".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rho.grid().dim() {
        1 => Ok(sample_1d(rho, n, &mut rng)),
        _ => sample_2d(rho, n, &mut rng),
    }
}

fn sample_1d(rho: &ScalarField, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let grid = *rho.grid();
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for &v in rho.values() {
        acc += v;
        cdf.push(acc);
    }
    let h = grid.spacing();
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let cell = cdf.partition_point(|&c| c <= u).min(grid.len() - 1);
            let x = grid.coord(cell) + (rng.random::<f64>() - 0.5) * h;
            grid.wrap_point([x, 0.0])
        })
        .collect()
}

fn sample_2d(rho: &ScalarField, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let grid = *rho.grid();
    let peak = rho.max();
    let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
    for (i, &v) in rho.values().iter().enumerate() {
        if v >= SUPPORT_REL * peak {
            let ij = grid.unflatten(i);
            for a in 0..2 {
                lo[a] = lo[a].min(ij[a]);
                hi[a] = hi[a].max(ij[a]);
            }
        }
    }
    let h = grid.spacing();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut accepted = None;
        for _ in 0..MAX_ATTEMPTS {
            let mut p = [0.0; 2];
            for a in 0..2 {
                let span = (hi[a] - lo[a] + 1) as f64;
                p[a] = grid.coord(lo[a]) - 0.5 * h + rng.random::<f64>() * span * h;
            }
            let p = grid.wrap_point(p);
            if rng.random::<f64>() * peak < rho.values()[grid.nearest_index(p)] {
                accepted = Some(p);
                break;
            }
        }
        match accepted {
            Some(p) => out.push(p),
            None => {
                return Err(Error::Sampling(format!(
                    "rejection sampling found no point in {MAX_ATTEMPTS} proposals"
                )))
            }
        }
    }
    Ok(out)
}
