//! Ehrenfest residuals from stored frames of either dynamics.

use crate::error::{Error, Result};
use crate::fields::{ComplexField, HasDensity, PolarPair, Potential, ScalarField, Spectral};
use crate::observe::moments;

/// States that know their density-weighted mean velocity ⟨∇S/m⟩_ρ.
pub trait MeanVelocity: HasDensity {
    fn mean_velocity(&self) -> Result<Vec<f64>>;
}

impl MeanVelocity for PolarPair {
    fn mean_velocity(&self) -> Result<Vec<f64>> {
        let rho = self.density();
        let norm = rho.integral();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("density has zero norm".into()));
        }
        let m = self.grid().mass();
        let (p, mask) = self.momentum();
        Ok(p.iter()
            .map(|pa| {
                let s: f64 = rho
                    .values()
                    .iter()
                    .zip(pa.values())
                    .zip(&mask)
                    .filter(|(_, masked)| !**masked)
                    .map(|((r, v), _)| r * v)
                    .sum();
                s / (m * rho.values().iter().sum::<f64>())
            })
            .collect())
    }
}

impl MeanVelocity for ComplexField {
    /// (ħ/m) ∫Im(ψ*∇ψ) / ∫|ψ|², which needs no density floor.
    fn mean_velocity(&self) -> Result<Vec<f64>> {
        let g = *self.grid();
        let total: f64 = self.values().iter().map(|z| z.norm_sqr()).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("density has zero norm".into()));
        }
        let coef = g.hbar() / g.mass();
        Ok(Spectral::new(g)
            .gradient_complex(self)
            .iter()
            .map(|d| {
                let s: f64 = self.values().iter().zip(d.values()).map(|(z, dz)| (z.conj() * dz).im).sum();
                coef * s / total
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhrenfestRow {
    pub t: f64,
    /// |d⟨x⟩/dt − ⟨∇S/m⟩_ρ|
    pub r1: f64,
    /// |m d²⟨x⟩/dt² − ⟨−∇V⟩_ρ|
    pub r2: f64,
}

/// ⟨−∇V⟩ under ρ/∫ρ.
fn mean_force(rho: &ScalarField, potential: &Potential, t: f64) -> Vec<f64> {
    let g = *rho.grid();
    let mut f = [0.0; 2];
    let mut total = 0.0;
    for (i, &r) in rho.values().iter().enumerate() {
        let grad = potential.gradient(g.point(i), t);
        f[0] -= r * grad[0];
        f[1] -= r * grad[1];
        total += r;
    }
    f[..g.dim()].iter().map(|v| v / total).collect()
}

fn euclid(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Residuals at every interior frame, with time derivatives of ⟨x⟩ taken
/// by centered differences. Frames must be equally spaced in time.
pub fn ehrenfest_residuals<S: MeanVelocity>(frames: &[(f64, S)], potential: &Potential) -> Result<Vec<EhrenfestRow>> {
    if frames.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 frames, got {}", frames.len())));
    }
    let h = frames[1].0 - frames[0].0;
    if !(h > 0.0) {
        return Err(Error::InvalidInput("frame times must increase".into()));
    }
    for w in frames.windows(2) {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidInput("frame cadence is not uniform".into()));
        }
    }
    let m = potential.grid().mass();
    let means = frames
        .iter()
        .map(|(_, s)| Ok(moments(&s.density())?.mean))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(frames.len() - 2);
    for k in 1..frames.len() - 1 {
        let (t, state) = (&frames[k].0, &frames[k].1);
        let v = state.mean_velocity()?;
        let force = mean_force(&state.density(), potential, *t);
        let dim = v.len();
        let r1 = euclid((0..dim).map(|a| (means[k + 1][a] - means[k - 1][a]) / (2.0 * h) - v[a]));
        let r2 = euclid(
            (0..dim).map(|a| m * (means[k + 1][a] - 2.0 * means[k][a] + means[k - 1][a]) / (h * h) - force[a]),
        );
        rows.push(EhrenfestRow { t: *t, r1, r2 });
    }
    Ok(rows)
}
