//! Scenario registry, default configurations and shared run helpers.

use num_complex::Complex64;
use toml::{Table, Value};

use super::config::{ScenarioConfig, StepSize};
use super::output::{RunOutput, Summary};
use crate::classical_solver::superpose_nonoverlapping;
use crate::error::{Error, Result};
use crate::fields::{compose, ComplexField, HasDensity, PolarPair, Potential, Spectral};

pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    defaults: &'static str,
    run: fn(&ScenarioConfig, &RunOutput) -> Result<Summary>,
}

const BASE: &str = r#"
[grid]
dim = 1
n = 1024
extent = 40.0
hbar = 1.0
mass = 1.0

[potential]
kind = "none"
omega = 1.0
force = [0.0, 0.0]
k = 1.0
softening = 0.1

[state]
kind = "gaussian"
center = [0.0, 0.0]
width = 0.5
momentum = [0.0, 0.0]

[solver]
kind = "both"
dt = "auto"
t_end = 1.0
frames = 10

[ensemble]
size = 20000
seed = 1
"#;

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "free-dispersion",
        description: "free Gaussian: linear packet spreads as l(t), classical packet keeps its width",
        defaults: "[solver]\nt_end = 0.5\n",
        run: super::runs::free_dispersion,
    },
    ScenarioInfo {
        name: "harmonic-soliton",
        description: "density crest in a harmonic well against the classical equation of motion",
        defaults: "[potential]\nkind = \"harmonic\"\n[state]\ncenter = [5.0, 0.0]\n[solver]\nt_end = 1.2\nframes = 240\n",
        run: super::runs::harmonic_soliton,
    },
    ScenarioInfo {
        name: "double-slit",
        description: "two counter-propagating packets: fringes in the linear theory, none in the classical one",
        defaults: "[state]\nkind = \"superposition\"\npackets = [\n  { center = [-8.0, 0.0], width = 1.0, momentum = [5.0, 0.0], weight = 0.5 },\n  { center = [8.0, 0.0], width = 1.0, momentum = [-5.0, 0.0], weight = 0.5 },\n]\n[solver]\nt_end = 1.6\n[scenario]\ndisjoint_t = 0.02\n",
        run: super::runs::double_slit,
    },
    ScenarioInfo {
        name: "equivariance",
        description: "trajectory ensemble along the velocity field against the solver density",
        defaults: "[potential]\nkind = \"harmonic\"\n[state]\ncenter = [1.0, 0.0]\n[solver]\nkind = \"classical\"\nt_end = 1.2\n",
        run: super::runs::equivariance,
    },
    ScenarioInfo {
        name: "ehrenfest",
        description: "Ehrenfest residuals of both dynamics in a harmonic well",
        defaults: "[potential]\nkind = \"harmonic\"\n[state]\ncenter = [2.0, 0.0]\nwidth = 0.7071067811865476\n[solver]\nt_end = 1.2\n[scenario]\nframes_per_period = 500\nsubsteps = 8\n",
        run: super::runs::ehrenfest,
    },
    ScenarioInfo {
        name: "pure-vs-mixed",
        description: "pure and mixed density matrices over disjoint bumps under diagonal observables",
        defaults: "[scenario]\nbasis_size = 8\ndraws = 100\n",
        run: super::runs::pure_vs_mixed,
    },
    ScenarioInfo {
        name: "exchange-term",
        description: "exchange integral of symmetrized two-particle densities",
        defaults: "[grid]\nn = 256\n[scenario]\nseparation = 2.0\n",
        run: super::runs::exchange_term,
    },
    ScenarioInfo {
        name: "phase-space",
        description: "phase-space ensembles from a polar state: momenta, energy and Liouville transport",
        defaults: "[potential]\nkind = \"harmonic\"\n[state]\ncenter = [2.0, 0.0]\n[solver]\nkind = \"classical\"\nt_end = 1.0\n[scenario]\np_box = [-1.0, 1.0]\n",
        run: super::runs::phase_space,
    },
    ScenarioInfo {
        name: "bohr",
        description: "Bohr condition and circular-orbit Coulomb spectrum from winding numbers",
        defaults: "[scenario]\nk = 1.0\nn_max = 3\n",
        run: super::runs::bohr,
    },
];

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

fn merge_into(base: &mut Table, layer: Table) {
    for (k, v) in layer {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(l)) => merge_into(b, l),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Full default table for a scenario.
pub fn defaults_for(name: &str) -> Option<Table> {
    let info = find(name)?;
    let mut t: Table = BASE.parse().expect("base defaults parse");
    merge_into(&mut t, info.defaults.parse().expect("scenario defaults parse"));
    let mut out = Table::new();
    out.insert("dir".into(), Value::String(format!("out/{name}")));
    t.insert("output".into(), Value::Table(out));
    Some(t)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Summary> {
    let info = find(&cfg.scenario).ok_or_else(|| Error::Config(format!("unknown scenario `{}`", cfg.scenario)))?;
    let out = RunOutput::create(&cfg.output_dir, &cfg.scenario, cfg.seed)?;
    let summary = (info.run)(cfg, &out)?;
    summary.write(&out)?;
    Ok(summary)
}

/// Time grid shared by every solver in a run.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub dt: f64,
    pub steps: usize,
    /// Steps between frames.
    pub every: usize,
}

/// Largest phase change per step allowed by the automatic step size.
const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Relative level defining the support of ρ or of |ψ̂|².
const SUPPORT_REL: f64 = 1e-12;

/// Fastest phase rotation (1/time) of ψ under the linear evolution: kinetic
/// energy of the highest occupied wavenumber plus |V| on the support.
pub fn linear_phase_rate(psi: &ComplexField, pot: &Potential) -> Result<f64> {
    let g = *psi.grid();
    let spec = Spectral::new(g);
    let mut buf = psi.values().to_vec();
    spec.forward(&mut buf);
    let peak = buf.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let k2 = (0..buf.len())
        .filter(|&i| buf[i].norm_sqr() > SUPPORT_REL * peak)
        .map(|i| spec.k2_at(i))
        .fold(0.0, f64::max);
    let kinetic = g.hbar() * g.hbar() * k2 / (2.0 * g.mass());
    Ok((kinetic + max_potential_on_support(&psi.density(), pot)?) / g.hbar())
}

/// Fastest rate of change of S/ħ under the classical evolution.
pub fn classical_phase_rate(state: &PolarPair, pot: &Potential) -> Result<f64> {
    let g = *state.grid();
    let rho = state.density();
    let peak = rho.max();
    let (p, mask) = state.momentum();
    let mut kinetic: f64 = 0.0;
    for i in 0..g.len() {
        if rho.values()[i] > SUPPORT_REL * peak && !mask[i] {
            let p2: f64 = p.iter().map(|c| c.values()[i].powi(2)).sum();
            kinetic = kinetic.max(p2 / (2.0 * g.mass()));
        }
    }
    Ok((kinetic + max_potential_on_support(&rho, pot)?) / g.hbar())
}

fn max_potential_on_support(rho: &crate::fields::ScalarField, pot: &Potential) -> Result<f64> {
    let v = pot.values_at(0.0)?;
    let peak = rho.max();
    Ok(rho
        .values()
        .iter()
        .zip(v.values())
        .filter(|(r, _)| **r > SUPPORT_REL * peak)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max))
}

/// Step size from the configuration (or the phase rate), rounded so that
/// `t_end` is an exact multiple of the frame spacing.
pub fn schedule(cfg: &ScenarioConfig, rate: f64) -> Schedule {
    let frames = cfg.frames;
    let dt_target = match cfg.dt {
        StepSize::Fixed(dt) => dt,
        StepSize::Auto => {
            let floor = cfg.t_end / (10 * frames) as f64;
            if rate > 0.0 {
                (MAX_PHASE_PER_STEP / rate).min(floor)
            } else {
                floor
            }
        }
    };
    let every = ((cfg.t_end / frames as f64) / dt_target).ceil().max(1.0) as usize;
    let steps = every * frames;
    Schedule {
        dt: cfg.t_end / steps as f64,
        steps,
        every,
    }
}

fn coefficients(cfg: &ScenarioConfig) -> Result<Vec<Complex64>> {
    let packets = cfg.packets()?;
    let total: f64 = packets.iter().map(|p| p.weight).sum();
    if packets.iter().any(|p| !(p.weight >= 0.0)) || !(total > 0.0) {
        return Err(Error::Config("packet weights must be non-negative with a positive sum".into()));
    }
    Ok(packets.iter().map(|p| Complex64::new((p.weight / total).sqrt(), 0.0)).collect())
}

/// Component states and their amplitude coefficients √(w_i / Σw).
pub fn components(cfg: &ScenarioConfig) -> Result<(Vec<PolarPair>, Vec<Complex64>)> {
    let states = cfg.packets()?.iter().map(|p| cfg.packet_state(p)).collect::<Result<Vec<_>>>()?;
    Ok((states, coefficients(cfg)?))
}

/// ψ₀ = Σ c_i R_i e^{iS_i/ħ}, normalized.
pub fn initial_psi(cfg: &ScenarioConfig) -> Result<ComplexField> {
    let (states, coefs) = components(cfg)?;
    let mut psi = compose(&states[0]).scaled(coefs[0]);
    for (s, c) in states.iter().zip(&coefs).skip(1) {
        psi = psi.add(&compose(s).scaled(*c));
    }
    let norm = psi.norm().sqrt();
    Ok(psi.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Polar initial state; superpositions need disjoint supports.
pub fn initial_pair(cfg: &ScenarioConfig) -> Result<PolarPair> {
    let (states, coefs) = components(cfg)?;
    if states.len() == 1 {
        return Ok(states.into_iter().next().expect("one state"));
    }
    superpose_nonoverlapping(&states, &coefs)
}
