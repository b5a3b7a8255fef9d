mod common;

use common::*;
use polarsim::classical_solver::{evolve_classical, ClassicalStepper};
use polarsim::fields::{gaussian_amplitude, plane_wave_action, Boundary};
use polarsim::observe::FrameRecorder;
use polarsim::trajectories::{
    crest_track, histogram_l1, indirect_momentum, integrate_trajectory, propagate_ensemble, AnalyticVelocity,
    CrestWindow, VelocityFrames, HISTOGRAM_BINS,
};
use polarsim::{Grid, HasDensity, PolarPair, Potential, ScalarField};
use std::f64::consts::PI;

/// Runs the classical solver and keeps velocity frames (every `v_every` steps)
/// and density frames (every `rho_every` steps).
fn classical_run(
    start: &PolarPair,
    pot: Potential,
    dt: f64,
    steps: usize,
    v_every: usize,
    rho_every: usize,
) -> (VelocityFrames, Vec<(f64, ScalarField)>) {
    let g = *start.grid();
    let mut frames = VelocityFrames::new(g, Boundary::Clamped).every(v_every);
    let mut dens = FrameRecorder::new(rho_every, |s: &PolarPair| Ok(s.density()));
    let mut st = ClassicalStepper::new(pot, dt).unwrap();
    evolve_classical(start, &mut st, steps, &mut [&mut frames, &mut dens]).unwrap();
    (frames, dens.into_frames())
}

#[test]
fn harmonic_trajectory_follows_the_oscillator() {
    // stays before the focal time T/4 of the S₀ = 0 flow
    let g = Grid::line(256, 20.0).unwrap();
    let start = PolarPair::new(gaussian_amplitude(g, [1.0, 0.0], 0.5).unwrap(), ScalarField::zeros(g)).unwrap();
    let dt = 0.005;
    let steps = 280;
    let (frames, _) = classical_run(&start, Potential::harmonic(g, 1.0).unwrap(), dt, steps, 1, steps);
    let t1 = steps as f64 * dt;
    for x0 in [0.5, 1.0, 1.7] {
        let tr = integrate_trajectory([x0, 0.0], &frames, 0.0, t1, dt).unwrap();
        for (t, x) in tr.times.iter().zip(&tr.positions) {
            let oracle = harmonic_ode(x0, 0.0, 1.0, *t, 2000);
            assert!((x[0] - oracle).abs() < 1e-4, "t={t} x={} oracle={oracle}", x[0]);
        }
    }
}

fn harmonic_flow_error(dt: f64) -> f64 {
    let g = Grid::line(64, 20.0).unwrap();
    // ∇S/m of the S₀ = 0 harmonic flow: -ω x tan(ωt)
    let src = AnalyticVelocity::new(g, |p: [f64; 2], t: f64| [-p[0] * t.tan(), 0.0]);
    let tr = integrate_trajectory([1.3, 0.0], &src, 0.0, 1.2, dt).unwrap();
    (tr.last().unwrap()[0] - 1.3 * 1.2f64.cos()).abs()
}

#[test]
fn rk4_error_drops_sixteenfold() {
    let e1 = harmonic_flow_error(0.1);
    let e2 = harmonic_flow_error(0.05);
    let ratio = e1 / e2;
    assert!((14.0..18.5).contains(&ratio), "ratio={ratio}");
}

#[test]
fn uniform_ensemble_stays_uniform() {
    let g = Grid::line(128, 10.0).unwrap();
    let rho = ScalarField::constant(g, 0.1);
    let src = AnalyticVelocity::new(g, |_, _| [0.0, 0.0]);
    let n = 20_000;
    let ens = propagate_ensemble(&rho, n, &src, 0.0, 1.0, 0.1, 5, 10).unwrap();
    let last = ens.positions_at(ens.times.len() - 1);
    let l1 = histogram_l1(&last, &rho, HISTOGRAM_BINS, None).unwrap();
    assert!(l1 < 3.0 * (HISTOGRAM_BINS as f64 / n as f64).sqrt(), "l1={l1}");
}

#[test]
fn advected_ensemble_mean_tracks_the_packet() {
    let g = Grid::line(256, 40.0).unwrap();
    let (l, p0) = (0.8, 1.5);
    let start = PolarPair::new(
        gaussian_amplitude(g, [-5.0, 0.0], l).unwrap(),
        plane_wave_action(g, [p0, 0.0]),
    )
    .unwrap();
    let steps = 200;
    let dt = 0.01;
    let (frames, _) = classical_run(&start, Potential::zero(g), dt, steps, 4, steps);
    let n = 4000;
    let ens = propagate_ensemble(&start.density(), n, &frames, 0.0, 2.0, dt, 42, 50).unwrap();
    for (k, t) in ens.times.iter().enumerate() {
        let xs = ens.positions_at(k);
        let mean = xs.iter().map(|p| p[0]).sum::<f64>() / xs.len() as f64;
        assert!((mean - (-5.0 + p0 * t)).abs() < 3.0 * l / (n as f64).sqrt(), "t={t}");
    }
}

#[test]
fn harmonic_ensemble_is_equivariant() {
    let g = Grid::line(256, 20.0).unwrap();
    let start = PolarPair::new(gaussian_amplitude(g, [1.0, 0.0], 0.5).unwrap(), ScalarField::zeros(g)).unwrap();
    let dt = 0.005;
    let steps = 240;
    let (frames, dens) = classical_run(&start, Potential::harmonic(g, 1.0).unwrap(), dt, steps, 4, 40);
    let n = 20_000;
    let ens = propagate_ensemble(&start.density(), n, &frames, 0.0, steps as f64 * dt, dt, 9, 40).unwrap();
    assert_eq!(ens.aborted(), 0);
    for (k, (t, rho)) in dens.iter().enumerate() {
        assert!((ens.times[k] - t).abs() < 1e-9);
        let l1 = histogram_l1(&ens.positions_at(k), rho, HISTOGRAM_BINS, None).unwrap();
        let bound = 0.05 + 3.0 * (HISTOGRAM_BINS as f64 / n as f64).sqrt();
        assert!(l1 < bound, "t={t} l1={l1}");
    }
}

#[test]
fn two_position_momentum_converges_at_first_order() {
    // oscillator released from rest at x = a: m Δx/Δt ≈ -m a ω² Δt / 2
    let g = Grid::line(64, 20.0).unwrap();
    let a = 1.3;
    let src = AnalyticVelocity::new(g, |p: [f64; 2], t: f64| [-p[0] * t.tan(), 0.0]);
    let tr = integrate_trajectory([a, 0.0], &src, 0.0, 0.5, 0.001).unwrap();
    let e1 = indirect_momentum(&tr, 0.0, 0.04, &g).unwrap()[0].abs();
    let e2 = indirect_momentum(&tr, 0.0, 0.02, &g).unwrap()[0].abs();
    assert!((e1 / e2 - 2.0).abs() < 0.05, "e1={e1} e2={e2}");
    assert!((e1 - a * 0.04 / 2.0).abs() < 1e-3);
}

#[test]
fn crest_momentum_matches_the_action_gradient() {
    // narrow packet in the harmonic well, measured at T/8 (before the focus)
    let g = Grid::line(512, 20.0).unwrap();
    let y0 = 2.0;
    let start = PolarPair::new(
        gaussian_amplitude(g, [y0, 0.0], 4.0 * g.spacing()).unwrap(),
        ScalarField::zeros(g),
    )
    .unwrap();
    let period = 2.0 * PI;
    let dt = period / 2000.0;
    let steps = 260;
    let (_, dens) = classical_run(&start, Potential::harmonic(g, 1.0).unwrap(), dt, steps, 4, 1);
    let crest = crest_track(&dens, CrestWindow { center: [y0, 0.0], half_width: 1.0 }).unwrap();
    let t = period / 8.0 - period / 1000.0;
    let p = indirect_momentum(&crest, t, period / 1000.0, &g).unwrap()[0];
    let oracle = -y0 * (period / 8.0).sin();
    assert!((p - oracle).abs() < 0.01 * oracle.abs(), "p={p} oracle={oracle}");
}

#[test]
fn advected_crest_moves_at_the_flow_speed() {
    let g = Grid::line(256, 20.0).unwrap();
    let p0 = 0.9;
    let start = PolarPair::new(gaussian_amplitude(g, [0.0; 2], 0.3).unwrap(), plane_wave_action(g, [p0, 0.0])).unwrap();
    let (_, dens) = classical_run(&start, Potential::zero(g), 0.01, 200, 4, 20);
    let crest = crest_track(&dens, CrestWindow { center: [0.0; 2], half_width: 1.0 }).unwrap();
    for w in crest.times.windows(2).zip(crest.positions.windows(2)) {
        let v = (w.1[1][0] - w.1[0][0]) / (w.0[1] - w.0[0]);
        assert!((v - p0).abs() < 1e-3, "v={v}");
    }
}

#[test]
fn same_seed_same_ensemble() {
    let g = Grid::square(32, 8.0).unwrap();
    let rho = gaussian_amplitude(g, [0.0; 2], 1.0).unwrap().map(|r| r * r);
    let src = AnalyticVelocity::new(g, |p: [f64; 2], _| [-p[1], p[0]]);
    let a = propagate_ensemble(&rho, 500, &src, 0.0, 1.0, 0.05, 77, 5).unwrap();
    let b = propagate_ensemble(&rho, 500, &src, 0.0, 1.0, 0.05, 77, 5).unwrap();
    let c = propagate_ensemble(&rho, 500, &src, 0.0, 1.0, 0.05, 78, 5).unwrap();
    for k in 0..a.times.len() {
        assert_eq!(a.positions_at(k), b.positions_at(k));
    }
    assert_ne!(a.positions_at(0), c.positions_at(0));
}
