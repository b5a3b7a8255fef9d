//! Semi-Lagrangian transport of R along the characteristics of ∇S/m.
//!
//! Each grid point x is traced backward over one dt in the frozen midpoint
//! velocity to its departure point x_d, and
//! R(x, t+dt) = R(x_d, t)·exp(-½∫∇²S/m ds), the integral taken along the
//! traced path (Liouville's formula for the flow Jacobian).

use rayon::prelude::*;

use super::ClassicalStepper;
use crate::error::{Error, Result};
use crate::fields::{interpolate_many, Boundary, ScalarField};

/// Advances R by one dt using the midpoint action `s_mid`, then moves the
/// stepper clock.
pub fn step_continuity(r: &ScalarField, s_mid: &ScalarField, stepper: &mut ClassicalStepper) -> Result<ScalarField> {
    stepper.check_grid(r)?;
    stepper.check_grid(s_mid)?;
    let t_mid = stepper.time() + 0.5 * stepper.dt();
    let out = transport(stepper, r, s_mid, t_mid)?;
    stepper.advance_clock();
    Ok(out)
}

pub(crate) fn transport(
    stepper: &mut ClassicalStepper,
    r: &ScalarField,
    s_mid: &ScalarField,
    t_mid: f64,
) -> Result<ScalarField> {
    if let Some((index, &value)) = r.values().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::NegativeAmplitude { index, value });
    }
    let grid = *stepper.grid();
    let dim = grid.dim();
    let inv_m = 1.0 / grid.mass();
    let dt = stepper.dt();
    let points = stepper.interpolation_points();

    // [v_x, (v_y,) ∇·v]
    let mut flow: Vec<Vec<f64>> = stepper
        .fd()
        .gradient(s_mid)
        .into_iter()
        .map(|g| g.into_values().into_iter().map(|v| v * inv_m).collect())
        .collect();
    flow.push(stepper.fd().laplacian(s_mid).into_values().into_iter().map(|v| v * inv_m).collect());
    let vmax = (0..grid.len())
        .map(|i| (0..dim).map(|a| flow[a][i] * flow[a][i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    // at most about one cell per sub-step
    let nsub = ((vmax * dt / grid.spacing()).ceil() as usize).max(1);
    let h = dt / nsub as f64;
    let flow_refs: Vec<&[f64]> = flow.iter().map(|f| f.as_slice()).collect();
    let rv = r.values();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let eval = |p: [f64; 2]| {
                let mut out = [0.0; 3];
                interpolate_many(&grid, &flow_refs, p, points, Boundary::Clamped, &mut out);
                // (velocity, divergence)
                ([out[0], if dim == 2 { out[1] } else { 0.0 }], out[dim])
            };
            let mut y = grid.point(i);
            let mut jac = 0.0;
            for _ in 0..nsub {
                // backward in time: dy/ds = -v(y), dJ/ds = ∇·v(y)
                let (v1, d1) = eval(y);
                let y2 = [y[0] - 0.5 * h * v1[0], y[1] - 0.5 * h * v1[1]];
                let (v2, d2) = eval(y2);
                let y3 = [y[0] - 0.5 * h * v2[0], y[1] - 0.5 * h * v2[1]];
                let (v3, d3) = eval(y3);
                let y4 = [y[0] - h * v3[0], y[1] - h * v3[1]];
                let (v4, d4) = eval(y4);
                for a in 0..dim {
                    y[a] -= h / 6.0 * (v1[a] + 2.0 * (v2[a] + v3[a]) + v4[a]);
                }
                jac += h / 6.0 * (d1 + 2.0 * (d2 + d3) + d4);
            }
            let mut rd = [0.0];
            interpolate_many(&grid, &[rv], y, points, Boundary::Periodic, &mut rd);
            rd[0] * (-0.5 * jac).exp()
        })
        .collect();

    let mut values = values;
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let total: f64 = values.iter().map(|v| v * v).sum();
    let mut clamped = 0.0;
    let mut events = 0;
    for v in values.iter_mut().filter(|v| **v < 0.0) {
        clamped += *v * *v;
        events += 1;
        *v = 0.0;
    }
    let fraction = if total > 0.0 { clamped / total } else { 0.0 };
    stepper.record_clamp(events, fraction);
    if fraction > stepper.clamp_budget() {
        return Err(Error::ClampBudget {
            time: t_mid,
            fraction,
            budget: stepper.clamp_budget(),
        });
    }
    Ok(ScalarField::from_raw(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian_amplitude, plane_wave_action, Grid, Potential};

    #[test]
    fn zero_gradient_leaves_r_unchanged() {
        let g = Grid::square(32, 8.0).unwrap();
        let r = gaussian_amplitude(g, [0.5, -0.5], 1.0).unwrap();
        let mut st = ClassicalStepper::new(Potential::zero(g), 0.1).unwrap();
        let out = step_continuity(&r, &ScalarField::constant(g, 2.0), &mut st).unwrap();
        assert!(out.max_abs_diff(&r) < 1e-15);
    }

    #[test]
    fn uniform_flow_shifts_by_whole_cells_exactly() {
        // one cell per step: departure points land on grid nodes
        let g = Grid::line(64, 16.0).unwrap();
        let dt = 0.1;
        let v = g.spacing() / dt;
        let r = gaussian_amplitude(g, [0.0; 2], 1.0).unwrap();
        let mut st = ClassicalStepper::new(Potential::zero(g), dt).unwrap();
        let out = step_continuity(&r, &plane_wave_action(g, [v, 0.0]), &mut st).unwrap();
        for i in 0..64 {
            assert!((out.values()[(i + 1) % 64] - r.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn clamp_budget_enforced() {
        // a single spike interpolated at half-cell offsets undershoots below zero
        let g = Grid::line(64, 16.0).unwrap();
        let mut spike = vec![0.0; 64];
        spike[32] = 1.0;
        let r = ScalarField::new(g, spike).unwrap();
        let dt = 0.1;
        let v = 0.5 * g.spacing() / dt;
        let s = plane_wave_action(g, [v, 0.0]);
        let mut st = ClassicalStepper::new(Potential::zero(g), dt).unwrap().with_interpolation_points(4).unwrap();
        assert!(matches!(step_continuity(&r, &s, &mut st), Err(Error::ClampBudget { .. })));
        let mut lax = ClassicalStepper::new(Potential::zero(g), dt).unwrap().with_clamp_budget(1.0).unwrap();
        let out = step_continuity(&r, &s, &mut lax).unwrap();
        assert!(out.min() >= 0.0);
        assert!(lax.clamp_stats().events > 0);
    }
}
