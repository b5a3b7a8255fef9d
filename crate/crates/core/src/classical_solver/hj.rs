//! Explicit RK4 for ∂ₜS = -(∇S)²/2m - V. Space is discretised with the
//! upwind HJ-WENO5 scheme and a Godunov Hamiltonian; S is not periodic,
//! so the box edges use extrapolated ghost cells.

use super::{CausticReport, ClassicalStepper};
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};

/// Sub-step bound: max|∇S|/m · h / dx.
const CFL: f64 = 0.5;

/// Advances S by one dt from the stepper clock, then moves the clock.
pub fn step_hj(s: &ScalarField, stepper: &mut ClassicalStepper) -> Result<ScalarField> {
    stepper.check_grid(s)?;
    let out = hj_advance(stepper, s, stepper.time(), stepper.dt())?;
    stepper.advance_clock();
    Ok(out)
}

/// max|∇²S| and whether it exceeds the stepper's threshold (in units of m/dt).
pub fn caustic_monitor(s: &ScalarField, stepper: &ClassicalStepper) -> CausticReport {
    let lap = stepper.fd().laplacian(s);
    report(stepper, lap.values(), stepper.time())
}

fn report(stepper: &ClassicalStepper, lap: &[f64], time: f64) -> CausticReport {
    let (idx, value) = lap
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let grid = stepper.grid();
    CausticReport {
        triggered: value * stepper.dt() / grid.mass() > stepper.caustic_threshold(),
        time,
        location: grid.point(idx),
        value,
    }
}

/// Right-hand side at (S, t), plus max|∇S|/m. Fails when the caustic
/// monitor trips or S stops being finite.
fn rhs(stepper: &ClassicalStepper, s: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
    let grid = *stepper.grid();
    if let Some(index) = s.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let field = ScalarField::from_raw(grid, s.to_vec());
    let lap = stepper.fd().laplacian(&field);
    let rep = report(stepper, lap.values(), t);
    if rep.triggered {
        return Err(Error::Caustic(rep));
    }
    let (p2, pmax) = godunov_p2(&grid, s);
    let v = stepper.potential_at(t)?;
    let inv2m = 0.5 / grid.mass();
    let out = p2.iter().zip(v.values()).map(|(p2, vi)| -p2 * inv2m - vi).collect();
    Ok((out, pmax / grid.mass()))
}

/// Godunov flux for |∇S|² from one-sided WENO5 derivatives: per axis
/// max(max(p⁻,0)², min(p⁺,0)²). Returns it with max|p±|.
fn godunov_p2(grid: &Grid, s: &[f64]) -> (Vec<f64>, f64) {
    let n = grid.n();
    let h = grid.spacing();
    let mut p2 = vec![0.0; s.len()];
    let mut pmax: f64 = 0.0;
    let mut line = vec![0.0; n + 2 * GHOST];
    let mut minus = vec![0.0; n];
    let mut plus = vec![0.0; n];
    // (first index, stride) of every grid line along every axis
    let lines: Vec<(usize, usize)> = match grid.dim() {
        1 => vec![(0, 1)],
        _ => (0..n).map(|l| (l, n)).chain((0..n).map(|l| (l * n, 1))).collect(),
    };
    for (first, stride) in lines {
        for i in 0..n {
            line[GHOST + i] = s[first + i * stride];
        }
        fill_ghosts(&mut line, n);
        weno_derivatives(&line, h, &mut minus, &mut plus);
        for i in 0..n {
            let (a, b) = (minus[i].max(0.0), plus[i].min(0.0));
            p2[first + i * stride] += (a * a).max(b * b);
            pmax = pmax.max(minus[i].abs()).max(plus[i].abs());
        }
    }
    (p2, pmax)
}

const GHOST: usize = 3;

/// Quadratic extrapolation into the ghost cells (exact for quadratic S).
fn fill_ghosts(line: &mut [f64], n: usize) {
    let g = GHOST;
    for k in 1..=g {
        let kf = k as f64;
        // Lagrange extrapolation through nodes 0, 1, 2 to -k
        let (w0, w1, w2) = ((kf + 1.0) * (kf + 2.0) / 2.0, -kf * (kf + 2.0), kf * (kf + 1.0) / 2.0);
        line[g - k] = w0 * line[g] + w1 * line[g + 1] + w2 * line[g + 2];
        let e = g + n - 1;
        line[e + k] = w0 * line[e] + w1 * line[e - 1] + w2 * line[e - 2];
    }
}

#[inline]
fn weno5(v1: f64, v2: f64, v3: f64, v4: f64, v5: f64) -> f64 {
    let d1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    let d2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    let d3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
    let s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
    let s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
    let s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2) + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);
    let scale = v1 * v1 + v2 * v2 + v3 * v3 + v4 * v4 + v5 * v5;
    let eps = 1e-6 * scale + 1e-300;
    let a1 = 0.1 / (eps + s1).powi(2);
    let a2 = 0.6 / (eps + s2).powi(2);
    let a3 = 0.3 / (eps + s3).powi(2);
    (a1 * d1 + a2 * d2 + a3 * d3) / (a1 + a2 + a3)
}

/// Left- and right-biased WENO5 derivatives of a ghost-padded line.
fn weno_derivatives(line: &[f64], h: f64, minus: &mut [f64], plus: &mut [f64]) {
    let d = |j: usize| (line[j + 1] - line[j]) / h;
    for i in 0..minus.len() {
        let c = i + GHOST;
        minus[i] = weno5(d(c - 3), d(c - 2), d(c - 1), d(c), d(c + 1));
        plus[i] = weno5(d(c + 2), d(c + 1), d(c), d(c - 1), d(c - 2));
    }
}

fn axpy(base: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + h * k).collect()
}

/// Advances S from `t0` by `h` (possibly several CFL-limited RK4 sub-steps).
pub(crate) fn hj_advance(stepper: &ClassicalStepper, s: &ScalarField, t0: f64, h: f64) -> Result<ScalarField> {
    let dx = stepper.grid().spacing();
    let mut cur = s.values().to_vec();
    let mut t = t0;
    let end = t0 + h;
    let mut remaining = h;
    while remaining > 1e-14 * h {
        let (k1, vmax) = rhs(stepper, &cur, t)?;
        let mut hs = remaining;
        if vmax * hs > CFL * dx {
            let nsub = (vmax * remaining / (CFL * dx)).ceil();
            hs = remaining / nsub;
        }
        let k2 = rhs(stepper, &axpy(&cur, 0.5 * hs, &k1), t + 0.5 * hs)?.0;
        let k3 = rhs(stepper, &axpy(&cur, 0.5 * hs, &k2), t + 0.5 * hs)?.0;
        let k4 = rhs(stepper, &axpy(&cur, hs, &k3), t + hs)?.0;
        for i in 0..cur.len() {
            cur[i] += hs / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        remaining -= hs;
        t = end - remaining;
    }
    if let Some(index) = cur.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(ScalarField::from_raw(*stepper.grid(), cur))
}
