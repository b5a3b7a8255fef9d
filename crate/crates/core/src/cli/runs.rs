//! The scenario runners. Each writes its files into the run directory and
//! returns the headline metrics for `summary.csv`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, SolverChoice};
use super::output::{RunOutput, Summary};
use super::scenarios::{classical_phase_rate, components, initial_pair, initial_psi, linear_phase_rate, schedule, Schedule};
use crate::classical_solver::{evolve_classical, superpose_nonoverlapping, ClassicalStepper};
use crate::ensembles::*;
use crate::error::{Error, Result};
use crate::fields::{
    gaussian_amplitude, interpolate, Boundary, ComplexField, FiniteDifference, Grid, HasDensity, Point,
    PolarPair, Potential, ScalarField,
};
use crate::linear_solver::{evolve_linear, LinearStepper};
use crate::observe::{FrameRecorder, ObservationLog};
use crate::quantization::{
    bohr_check, coulomb_circular_spectrum, winding_number, write_spectrum_csv, LoopPath, DEFAULT_LOOP_SAMPLES,
};
use crate::trajectories::{
    crest_track, ensemble_summary, histogram_l1, indirect_momentum, propagate_ensemble, write_summary_csv,
    write_trajectories_csv, CrestWindow, VelocityFrames, HISTOGRAM_BINS,
};

type Frames<T> = Vec<(f64, T)>;

/// Schedule shared by the solvers selected in `cfg`.
fn shared_schedule(cfg: &ScenarioConfig, pot: &Potential) -> Result<Schedule> {
    let mut rate: f64 = 0.0;
    if cfg.solver.linear() {
        rate = rate.max(linear_phase_rate(&initial_psi(cfg)?, pot)?);
    }
    if cfg.solver.classical() {
        rate = rate.max(classical_phase_rate(&initial_pair(cfg)?, pot)?);
    }
    Ok(schedule(cfg, rate))
}

struct LinearRun {
    log: ObservationLog,
    frames: Frames<ComplexField>,
}

fn run_linear(psi0: &ComplexField, pot: &Potential, sch: Schedule, every: usize) -> Result<LinearRun> {
    let mut log = ObservationLog::new(every);
    let mut rec = FrameRecorder::new(every, |s: &ComplexField| Ok(s.clone()));
    let mut st = LinearStepper::new(pot.clone(), sch.dt)?;
    evolve_linear(psi0, &mut st, sch.steps, &mut [&mut log, &mut rec])?;
    Ok(LinearRun {
        log,
        frames: rec.into_frames(),
    })
}

struct ClassicalRun {
    log: ObservationLog,
    frames: Frames<PolarPair>,
}

fn run_classical(start: &PolarPair, pot: &Potential, sch: Schedule, every: usize) -> Result<ClassicalRun> {
    let mut log = ObservationLog::new(every);
    let mut rec = FrameRecorder::new(every, |s: &PolarPair| Ok(s.clone()));
    let mut st = ClassicalStepper::new(pot.clone(), sch.dt)?;
    evolve_classical(start, &mut st, sch.steps, &mut [&mut log, &mut rec])?;
    Ok(ClassicalRun {
        log,
        frames: rec.into_frames(),
    })
}

fn densities<S: HasDensity>(frames: &[(f64, S)]) -> Frames<ScalarField> {
    frames.iter().map(|(t, s)| (*t, s.density())).collect()
}

fn width_ratio(log: &ObservationLog) -> f64 {
    let (first, last) = (&log.rows[0], log.rows.last().expect("rows"));
    last.width[0] / first.width[0]
}

fn norm_drift(log: &ObservationLog) -> f64 {
    let n0 = log.rows[0].norm;
    log.rows.iter().map(|r| (r.norm - n0).abs() / n0).fold(0.0, f64::max)
}

fn single_packet(cfg: &ScenarioConfig) -> Result<super::config::Packet> {
    match cfg.packets()?.as_slice() {
        [p] => Ok(p.clone()),
        _ => Err(Error::Config("this scenario needs a single gaussian packet".into())),
    }
}

pub fn free_dispersion(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let sch = shared_schedule(cfg, &pot)?;
    let packet = single_packet(cfg)?;
    let g = cfg.grid;
    let mut s = Summary::default();
    s.num("t_end", cfg.t_end);
    s.num("dt", sch.dt);
    let mut logs = Vec::new();
    if cfg.solver.linear() {
        let run = run_linear(&initial_psi(cfg)?, &pot, sch, sch.every)?;
        let tau = g.hbar() * cfg.t_end / (2.0 * g.mass() * packet.width * packet.width);
        let exact = (1.0 + tau * tau).sqrt();
        let ratio = width_ratio(&run.log);
        s.num("linear_width_ratio", ratio);
        s.num("exact_width_ratio", exact);
        s.num("linear_width_error", (ratio - exact).abs());
        s.num("linear_norm_drift", norm_drift(&run.log));
        out.snapshots("linear_rho", &densities(&run.frames))?;
        logs.push(("linear", run.log));
    }
    if cfg.solver.classical() {
        let run = run_classical(&initial_pair(cfg)?, &pot, sch, sch.every)?;
        s.num("classical_width_ratio", width_ratio(&run.log));
        s.num("classical_norm_drift", norm_drift(&run.log));
        out.snapshots("classical_rho", &densities(&run.frames))?;
        logs.push(("classical", run.log));
    }
    out.write_log(&logs.iter().map(|(n, l)| (*n, l)).collect::<Vec<_>>())?;
    Ok(s)
}

/// Position of a particle in V = ½mω²x² started at (x0, p0).
fn oscillator(x0: f64, p0: f64, m: f64, omega: f64, t: f64) -> f64 {
    x0 * (omega * t).cos() + p0 / (m * omega) * (omega * t).sin()
}

fn harmonic_omega(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.potential {
        super::config::PotentialSpec::Harmonic { omega } => Ok(omega),
        _ => Err(Error::Config("this scenario needs potential.kind = \"harmonic\"".into())),
    }
}

pub fn harmonic_soliton(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let omega = harmonic_omega(cfg)?;
    let packet = single_packet(cfg)?;
    let sch = shared_schedule(cfg, &pot)?;
    let g = cfg.grid;
    let m = g.mass();
    let amplitude = (packet.center[0].powi(2) + (packet.momentum[0] / (m * omega)).powi(2)).sqrt();
    let window = CrestWindow {
        center: packet.center,
        half_width: (4.0 * packet.width).max(4.0 * g.spacing()),
    };
    let crest_error = |frames: &Frames<ScalarField>| -> Result<(crate::trajectories::Trajectory, f64)> {
        let crest = crest_track(frames, window)?;
        let err = crest
            .times
            .iter()
            .zip(&crest.positions)
            .map(|(t, p)| (p[0] - oscillator(packet.center[0], packet.momentum[0], m, omega, *t)).abs())
            .fold(0.0, f64::max);
        Ok((crest, err))
    };
    let mut s = Summary::default();
    s.num("amplitude", amplitude);
    s.num("t_end", cfg.t_end);
    let mut logs = Vec::new();
    if cfg.solver.linear() {
        let run = run_linear(&initial_psi(cfg)?, &pot, sch, sch.every)?;
        let rho = densities(&run.frames);
        let (_, err) = crest_error(&rho)?;
        s.num("linear_crest_max_error", err);
        s.num("linear_crest_max_error_rel", err / amplitude);
        logs.push(("linear", run.log));
    }
    if cfg.solver.classical() {
        let run = run_classical(&initial_pair(cfg)?, &pot, sch, sch.every)?;
        let rho = densities(&run.frames);
        let (crest, err) = crest_error(&rho)?;
        s.num("classical_crest_max_error", err);
        s.num("classical_crest_max_error_rel", err / amplitude);
        // crest velocity m Δx/Δt against ∇S/m at the crest, interior frames
        let fd = FiniteDifference::new(g);
        let h = sch.dt * sch.every as f64;
        let v_max = amplitude * omega;
        let mut worst: f64 = 0.0;
        for k in 1..crest.len().saturating_sub(1) {
            let t = crest.times[k];
            let p = indirect_momentum(&crest, t - h, 2.0 * h, &g)?;
            let ds = fd.derivative(run.frames[k].1.s(), 0);
            let grad = interpolate(&g, ds.values(), crest.positions[k], 4, Boundary::Clamped);
            worst = worst.max((p[0] / m - grad / m).abs());
        }
        s.num("classical_velocity_residual_rel", worst / v_max);
        out.snapshots("classical_rho", &rho[..rho.len().min(11)])?;
        logs.push(("classical", run.log));
    }
    out.write_log(&logs.iter().map(|(n, l)| (*n, l)).collect::<Vec<_>>())?;
    Ok(s)
}

/// (max − min)/(max + min) of ρ over |x| ≤ half_width.
fn central_visibility(rho: &ScalarField, half_width: f64) -> f64 {
    let g = rho.grid();
    let vals: Vec<f64> = (0..g.len())
        .filter(|&i| g.point(i)[0].abs() <= half_width)
        .map(|i| rho.values()[i])
        .collect();
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let min = vals.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

/// Closed-form free Gaussian with initial phase e^{ip₀x/ħ}.
fn free_gaussian(x: f64, t: f64, center: f64, p0: f64, width: f64, hbar: f64, m: f64) -> Complex64 {
    let a = Complex64::new(1.0, hbar * t / (2.0 * m * width * width));
    let d = x - center - p0 * t / m;
    let norm = (2.0 * PI * width * width).powf(-0.25);
    let phase = p0 * x / hbar - p0 * p0 * t / (2.0 * m * hbar);
    norm / a.sqrt() * (-(d * d) / (4.0 * width * width * a)).exp() * Complex64::from_polar(1.0, phase)
}

pub fn double_slit(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let packets = cfg.packets()?;
    if packets.len() != 2 || cfg.grid.dim() != 1 {
        return Err(Error::Config("double-slit needs two packets on a 1D grid".into()));
    }
    let sch = shared_schedule(cfg, &pot)?;
    let g = cfg.grid;
    let (hbar, m) = (g.hbar(), g.mass());
    let p0 = packets[0].momentum[0].abs().max(packets[1].momentum[0].abs());
    // fringe period for relative momentum 2p₀
    let half_window = 0.5 * PI * hbar / p0;
    let (states, coefs) = components(cfg)?;
    let mut s = Summary::default();
    s.num("fringe_period", 2.0 * half_window);
    let mut logs = Vec::new();
    if cfg.solver.linear() {
        let run = run_linear(&initial_psi(cfg)?, &pot, sch, sch.every)?;
        let (t, psi) = run.frames.last().expect("frames");
        let rho = psi.density();
        s.num("linear_visibility", central_visibility(&rho, half_window));
        // closed form, normalized like the initial state
        let oracle = ComplexField::from_fn(g, |x| {
            packets
                .iter()
                .zip(&coefs)
                .map(|(p, c)| c * free_gaussian(x[0], *t, p.center[0], p.momentum[0], p.width, hbar, m))
                .sum()
        })?;
        let psi0_norm = {
            let first = ComplexField::from_fn(g, |x| {
                packets
                    .iter()
                    .zip(&coefs)
                    .map(|(p, c)| c * free_gaussian(x[0], 0.0, p.center[0], p.momentum[0], p.width, hbar, m))
                    .sum()
            })?;
            first.norm()
        };
        let rho_oracle = oracle.density().scaled(1.0 / psi0_norm);
        let err = rho.max_abs_diff(&rho_oracle) / rho_oracle.max();
        s.num("linear_oracle_max_error_rel", err);
        out.snapshot("linear_rho", 0, &rho)?;
        logs.push(("linear", run.log));
    }
    if cfg.solver.classical() {
        let mut mixture = ScalarField::zeros(g);
        for (k, (st, c)) in states.iter().zip(&coefs).enumerate() {
            let run = run_classical(st, &pot, sch, sch.every)?;
            let rho = run.frames.last().expect("frames").1.density().scaled(c.norm_sqr());
            mixture = mixture.zip_map(&rho, |a, b| a + b);
            logs.push((if k == 0 { "classical_a" } else { "classical_b" }, run.log));
        }
        s.num("classical_visibility", central_visibility(&mixture, half_window));
        out.snapshot("classical_mixture_rho", 0, &mixture)?;

        // combined state against the components while the supports stay apart
        let t_check = cfg.extra_f64("disjoint_t")?.min(cfg.t_end);
        let steps = (t_check / sch.dt).round().max(1.0) as usize;
        let short = Schedule {
            dt: sch.dt,
            steps,
            every: steps,
        };
        let combined = run_classical(&superpose_nonoverlapping(&states, &coefs)?, &pot, short, steps)?;
        let mut sum = ScalarField::zeros(g);
        for (st, c) in states.iter().zip(&coefs) {
            let run = run_classical(st, &pot, short, steps)?;
            sum = sum.zip_map(&run.frames.last().expect("frames").1.density().scaled(c.norm_sqr()), |a, b| a + b);
        }
        let comb = combined.frames.last().expect("frames").1.density();
        s.num("classical_disjoint_t", steps as f64 * sch.dt);
        s.num("classical_disjoint_deviation", comb.max_abs_diff(&sum));
    }
    out.write_log(&logs.iter().map(|(n, l)| (*n, l)).collect::<Vec<_>>())?;
    Ok(s)
}

/// Histogram L1 of a trajectory ensemble against the solver density at
/// every frame, for each selected solver.
pub fn equivariance(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let sch = shared_schedule(cfg, &pot)?;
    let g = cfg.grid;
    let n = cfg.ensemble_size;
    let mut s = Summary::default();
    s.num("ensemble_size", n as f64);
    s.num("l1_statistical_floor", 3.0 * (HISTOGRAM_BINS as f64 / n as f64).sqrt());
    let mut logs = Vec::new();
    let mut solvers = Vec::new();
    if cfg.solver.classical() {
        solvers.push(SolverChoice::Classical);
    }
    if cfg.solver.linear() {
        solvers.push(SolverChoice::Linear);
    }
    for solver in solvers {
        let (name, rho, velocity, log) = match solver {
            SolverChoice::Classical => {
                let mut v = VelocityFrames::new(g, Boundary::Clamped);
                let mut rec = FrameRecorder::new(sch.every, |p: &PolarPair| Ok(p.density()));
                let mut log = ObservationLog::new(sch.every);
                let mut st = ClassicalStepper::new(pot.clone(), sch.dt)?;
                evolve_classical(&initial_pair(cfg)?, &mut st, sch.steps, &mut [&mut v, &mut rec, &mut log])?;
                ("classical", rec.into_frames(), v, log)
            }
            _ => {
                let mut v = VelocityFrames::new(g, Boundary::Periodic);
                let mut rec = FrameRecorder::new(sch.every, |p: &ComplexField| Ok(p.density()));
                let mut log = ObservationLog::new(sch.every);
                let mut st = LinearStepper::new(pot.clone(), sch.dt)?;
                evolve_linear(&initial_psi(cfg)?, &mut st, sch.steps, &mut [&mut v, &mut rec, &mut log])?;
                ("linear", rec.into_frames(), v, log)
            }
        };
        let ens = propagate_ensemble(&rho[0].1, n, &velocity, 0.0, cfg.t_end, sch.dt, cfg.seed, sch.every)?;
        let rows = ensemble_summary(&ens, &rho, HISTOGRAM_BINS)?;
        let max_l1 = rows.iter().filter_map(|r| r.l1).fold(0.0, f64::max);
        s.num(format!("{name}_max_l1"), max_l1);
        s.num(format!("{name}_aborted_fraction"), ens.aborted_fraction());
        write_summary_csv(out.path(&format!("{name}_ensemble.csv")), &rows)?;
        let keep = ens.trajectories.len().min(100);
        write_trajectories_csv(out.path(&format!("{name}_trajectories.csv")), &ens.trajectories[..keep], g.dim())?;
        out.snapshots(&format!("{name}_rho"), &rho)?;
        logs.push((name, log));
    }
    out.write_log(&logs.iter().map(|(n, l)| (*n, l)).collect::<Vec<_>>())?;
    Ok(s)
}

fn max_r(rows: &[EhrenfestRow]) -> (f64, f64) {
    rows.iter().fold((0.0, 0.0), |(a, b), r| (a.max(r.r1), b.max(r.r2)))
}

/// Residuals at the configured cadence and at twice that spacing.
fn ehrenfest_pair<S: MeanVelocity + Clone>(frames: &[(f64, S)], pot: &Potential) -> Result<(Vec<EhrenfestRow>, f64)> {
    let fine = ehrenfest_residuals(frames, pot)?;
    let coarse_frames: Vec<(f64, S)> = frames.iter().step_by(2).cloned().collect();
    let coarse = ehrenfest_residuals(&coarse_frames, pot)?;
    let ratio = max_r(&coarse).1 / max_r(&fine).1;
    Ok((fine, ratio))
}

pub fn ehrenfest(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let omega = harmonic_omega(cfg)?;
    let packet = single_packet(cfg)?;
    let g = cfg.grid;
    let frame_dt = 2.0 * PI / omega / cfg.extra_usize("frames_per_period")? as f64;
    let sub = cfg.extra_usize("substeps")?;
    let frames = (cfg.t_end / frame_dt).floor() as usize;
    if frames < 5 {
        return Err(Error::Config("t_end must cover at least 5 frames".into()));
    }
    let sch = Schedule {
        dt: frame_dt / sub as f64,
        steps: frames * sub,
        every: sub,
    };
    let amplitude = (packet.center[0].powi(2) + (packet.momentum[0] / (g.mass() * omega)).powi(2)).sqrt();
    let mut s = Summary::default();
    s.num("frame_dt", frame_dt);
    s.num("r2_bound", 1e-4 * g.mass() * omega * omega * amplitude);
    let mut body = String::from("solver,t,r1,r2\n");
    let mut logs = Vec::new();
    let mut record = |name: &str, rows: &[EhrenfestRow], ratio: f64, s: &mut Summary| {
        let (r1, r2) = max_r(rows);
        s.num(format!("{name}_max_r1"), r1);
        s.num(format!("{name}_max_r2"), r2);
        s.num(format!("{name}_r2_halving_ratio"), ratio);
        for r in rows {
            body.push_str(&format!("{name},{},{:e},{:e}\n", r.t, r.r1, r.r2));
        }
    };
    if cfg.solver.linear() {
        let run = run_linear(&initial_psi(cfg)?, &pot, sch, sch.every)?;
        let (rows, ratio) = ehrenfest_pair(&run.frames, &pot)?;
        record("linear", &rows, ratio, &mut s);
        logs.push(("linear", run.log));
    }
    if cfg.solver.classical() {
        let run = run_classical(&initial_pair(cfg)?, &pot, sch, sch.every)?;
        let (rows, ratio) = ehrenfest_pair(&run.frames, &pot)?;
        record("classical", &rows, ratio, &mut s);
        logs.push(("classical", run.log));
    }
    out.write_csv("ehrenfest.csv", &body)?;
    out.write_log(&logs.iter().map(|(n, l)| (*n, l)).collect::<Vec<_>>())?;
    Ok(s)
}

/// `count` cos² bumps of equal width tiling the middle 80% of a 1D grid.
fn bump_basis(g: Grid, count: usize) -> Result<PositiveBasis> {
    let span = 0.8 * g.extent();
    let pitch = span / count as f64;
    let members = (0..count)
        .map(|i| {
            let c = -0.5 * span + (i as f64 + 0.5) * pitch;
            ScalarField::from_fn(g, |p| {
                let u = (p[0] - c) / (0.45 * pitch);
                if u.abs() < 1.0 {
                    (0.5 * PI * u).cos().powi(2)
                } else {
                    0.0
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PositiveBasis::normalized(members)
}

pub fn pure_vs_mixed(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let g = cfg.grid;
    if g.dim() != 1 {
        return Err(Error::Config("pure-vs-mixed needs a 1D grid".into()));
    }
    let basis = bump_basis(g, cfg.extra_usize("basis_size")?)?;
    let draws = cfg.extra_usize("draws")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut worst, mut idem): (f64, f64) = (0.0, 0.0);
    for d in 0..draws {
        let raw: Vec<f64> = (0..basis.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let modes: Vec<(f64, f64)> = (0..4).map(|_| (rng.random::<f64>(), 2.0 * PI * rng.random::<f64>())).collect();
        let offset = 1.0 + modes.iter().map(|m| m.0).sum::<f64>();
        let a = ScalarField::from_fn(g, |p| {
            offset
                + modes
                    .iter()
                    .enumerate()
                    .map(|(j, (amp, ph))| amp * ((j + 1) as f64 * 2.0 * PI * p[0] / g.extent() + ph).cos())
                    .sum::<f64>()
        })?;
        let pure = pure_density(&w, &basis)?;
        let mixed = mixed_density(&w, &basis)?;
        worst = worst.max((expect_diagonal(&pure, &a)? - expect_diagonal(&mixed, &a)?).abs());
        let rho = pure.entries();
        idem = idem.max((rho * rho - rho).amax());
        if d == 0 {
            pure.write_csv(out.path("pure_density.csv"))?;
            mixed.write_csv(out.path("mixed_density.csv"))?;
        }
    }
    let m = basis.members();
    let ex = exchange_density(&m[0], &m[1])?;
    let mut s = Summary::default();
    s.num("basis_size", basis.len() as f64);
    s.num("draws", draws as f64);
    s.num("max_pure_mixed_difference", worst);
    s.num("pure_idempotency_error", idem);
    s.num("disjoint_exchange", ex.exchange);
    for (k, r) in m.iter().enumerate() {
        out.snapshot("basis", k, r)?;
    }
    Ok(s)
}

pub fn exchange_term(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let g = cfg.grid;
    if g.dim() != 1 {
        return Err(Error::Config("exchange-term needs a 1D grid".into()));
    }
    let basis = bump_basis(g, 2)?;
    let m = basis.members();
    let ex = exchange_density(&m[0], &m[1])?;
    let d = cfg.extra_f64("separation")?;
    let r1 = gaussian_amplitude(g, [-0.5 * d, 0.0], 1.0)?;
    let r2 = gaussian_amplitude(g, [0.5 * d, 0.0], 1.0)?;
    let overlapping = match exchange_density(&r1, &r2) {
        Err(Error::SupportOverlap { overlap, .. }) => overlap,
        Ok(e) => e.exchange,
        Err(e) => return Err(e),
    };
    let identical_rejected = matches!(exchange_density(&m[0], &m[0]), Err(Error::SupportOverlap { .. }));
    let mut s = Summary::default();
    s.num("disjoint_exchange", ex.exchange);
    s.num("disjoint_norm", ex.norm);
    s.num("overlapping_exchange", overlapping);
    s.flag("identical_rejected", identical_rejected);
    out.snapshot("pair_rho", 0, &ex.field)?;
    Ok(s)
}

pub fn phase_space(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let pot = cfg.build_potential()?;
    let g = cfg.grid;
    let m = g.mass();
    let mut pure_cfg = cfg.clone();
    pure_cfg.solver = SolverChoice::Classical;
    let sch = shared_schedule(&pure_cfg, &pot)?;
    let start = initial_pair(cfg)?;
    let run = run_classical(&start, &pot, sch, sch.steps)?;
    let (t1, end) = run.frames.last().expect("frames");
    let n = cfg.ensemble_size;

    // energy of the S-flow at t = 0 on the grid
    let rho0 = start.density();
    let (p0, _) = start.momentum();
    let energy0 = (0..g.len())
        .map(|i| {
            let p2: f64 = p0.iter().map(|c| c.values()[i].powi(2)).sum();
            rho0.values()[i] * (p2 / (2.0 * m) + pot.value(g.point(i), 0.0))
        })
        .sum::<f64>()
        / rho0.values().iter().sum::<f64>();
    let e1 = phase_space_from_pure(end, n, cfg.seed)?;
    let energy = |x: Point, p: [f64; 2]| (p[0] * p[0] + p[1] * p[1]) / (2.0 * m) + pot.value(x, *t1);
    let mean = phase_space_average(&e1, energy)?;
    let var = phase_space_average(&e1, |x, p| (energy(x, p) - mean).powi(2))?;

    // Liouville: transport the initial ensemble along Hamilton's equations
    let e0 = phase_space_from_pure(&start, n, cfg.seed)?;
    let moved = evolve_characteristics(&e0, &pot, 0.0, *t1, sch.dt)?;
    let l1 = histogram_l1(&moved.positions(), &end.density(), HISTOGRAM_BINS, None)?;

    // box ensemble built from R alone
    let bounds = match cfg.extra.get("p_box") {
        Some(toml::Value::Array(v)) if v.len() == 2 => {
            let num = |x: &toml::Value| x.as_float().or_else(|| x.as_integer().map(|i| i as f64));
            match (num(&v[0]), num(&v[1])) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Config("scenario.p_box must be two numbers".into())),
            }
        }
        _ => return Err(Error::Config("scenario.p_box must be [lo, hi]".into())),
    };
    let p_box = vec![bounds; g.dim()];
    let boxed = phase_space_from_r(start.r(), &p_box, n, cfg.seed)?;
    let box_mean = phase_space_average(&boxed, |_, p| p[0])?;

    let mut s = Summary::default();
    s.num("t_end", *t1);
    s.num("energy_initial", energy0);
    s.num("energy_ensemble_mean", mean);
    s.num("energy_sampling_error", var.sqrt() / (n as f64).sqrt());
    s.num("liouville_l1", l1);
    s.num("box_mean_momentum", box_mean);
    s.num("box_center", 0.5 * (bounds.0 + bounds.1));
    s.num("box_sampling_error", (bounds.1 - bounds.0) / (12.0 * n as f64).sqrt());
    e1.write_csv(out.path("phase_space.csv"))?;
    out.snapshot("classical_rho", 0, &rho0)?;
    out.snapshot("classical_rho", 1, &end.density())?;
    out.write_log(&[("classical", &run.log)])?;
    Ok(s)
}

pub fn bohr(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Summary> {
    let g = cfg.grid;
    let k = cfg.extra_f64("k")?;
    let n_max = cfg.extra_usize("n_max")? as u32;
    let levels = coulomb_circular_spectrum(k, g.mass(), g.hbar(), n_max)?;
    write_spectrum_csv(out.path("spectrum.csv"), &levels)?;
    let mut s = Summary::default();
    for l in &levels {
        s.num(format!("E_{}", l.n), l.energy);
        s.num(format!("r_{}", l.n), l.radius);
    }
    s.flag("all_winding_ok", levels.iter().all(|l| l.winding_ok));
    // S = 2.5ħφ cannot be single valued
    let angle = Grid::line(DEFAULT_LOOP_SAMPLES, 2.0 * PI)?;
    let half = ScalarField::from_fn(angle, |p| 2.5 * p[0])?;
    let w = winding_number(&half, &LoopPath::angular(angle)?, 1.0)?;
    s.num("half_integer_residual", w.residual);
    let (n, dev) = bohr_check(levels[0].radius * (m_v(k, g.mass(), levels[0].radius)), g.hbar());
    s.num("bohr_n_ground", n as f64);
    s.num("bohr_deviation_ground", dev);
    Ok(s)
}

/// m·v on a circular Coulomb orbit of radius r (mv²/r = k/r²).
fn m_v(k: f64, m: f64, r: f64) -> f64 {
    (m * k / r).sqrt()
}

