//! Superposition of classical states with disjoint supports.
//!
//! On each support the combined action is that component's S (plus
//! ħ·arg c). Between supports, where R vanishes, S is filled so that S and
//! ∇S stay continuous: a jump in ∇S at a support edge would act as an
//! immediate shock in the velocity field.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{Grid, PolarPair, ScalarField};

/// Density floor, relative to the combined peak, that defines a support.
pub const OVERLAP_FLOOR_REL: f64 = 1e-12;

const CG_TOL: f64 = 1e-10;
const CG_MAX_ITERS: usize = 20_000;

/// Combines Σ cₐψₐ for states whose supports are disjoint. The overlap
/// measure is max |cₐ|Rₐ·|c_b|R_b over the grid, relative to the combined
/// peak density; it must not exceed [`OVERLAP_FLOOR_REL`].
pub fn superpose_nonoverlapping(states: &[PolarPair], coefficients: &[Complex64]) -> Result<PolarPair> {
    if states.is_empty() {
        return Err(Error::InvalidInput("superposition of an empty list".into()));
    }
    if states.len() != coefficients.len() {
        return Err(Error::InvalidInput(format!(
            "{} states but {} coefficients",
            states.len(),
            coefficients.len()
        )));
    }
    let grid = *states[0].grid();
    if states.iter().any(|s| s.grid() != &grid) {
        return Err(Error::InvalidInput("states live on different grids".into()));
    }
    let hbar = grid.hbar();
    let amps: Vec<ScalarField> = states
        .iter()
        .zip(coefficients)
        .map(|(s, c)| s.r().scaled(c.norm()))
        .collect();
    let actions: Vec<ScalarField> = states
        .iter()
        .zip(coefficients)
        .map(|(s, c)| s.s().map(|v| v + hbar * c.arg()))
        .collect();
    if states.len() == 1 {
        return PolarPair::new(amps[0].clone(), actions[0].clone());
    }

    let len = grid.len();
    let peak = (0..len)
        .map(|i| amps.iter().map(|a| a.values()[i]).sum::<f64>().powi(2))
        .fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::EmptyField { floor: 0.0 });
    }
    let floor = OVERLAP_FLOOR_REL * peak;
    let mut overlap: f64 = 0.0;
    for a in 0..amps.len() {
        for b in (a + 1)..amps.len() {
            for i in 0..len {
                overlap = overlap.max(amps[a].values()[i] * amps[b].values()[i]);
            }
        }
    }
    if overlap > floor {
        return Err(Error::SupportOverlap {
            overlap: overlap / peak,
            tolerance: OVERLAP_FLOOR_REL,
        });
    }

    let mut r = vec![0.0; len];
    let mut s = vec![0.0; len];
    let mut known = vec![false; len];
    for i in 0..len {
        let mut wsum = 0.0;
        let mut blend = 0.0;
        for (amp, act) in amps.iter().zip(&actions) {
            let a = amp.values()[i];
            r[i] += a;
            if a * a > floor {
                known[i] = true;
                s[i] = act.values()[i];
            }
            wsum += a * a;
            blend += a * a * act.values()[i];
        }
        if !known[i] && wsum > 0.0 {
            // initial guess for the extension
            s[i] = blend / wsum;
        }
    }
    if grid.dim() == 1 {
        extend_1d(&grid, &mut s, &known);
    } else {
        extend_2d(&grid, &mut s, &known)?;
    }
    PolarPair::new(ScalarField::new(grid, r)?, ScalarField::new(grid, s)?)
}

/// One-sided slope at the end of a known run, looking back into it.
fn run_slope(s: &[f64], known: &[bool], i: usize, dir: isize, h: f64) -> f64 {
    let at = |k: isize| -> Option<f64> {
        let j = i as isize - dir * k;
        (j >= 0 && (j as usize) < s.len() && known[j as usize]).then(|| s[j as usize])
    };
    let sign = dir as f64;
    match (at(1), at(2)) {
        (Some(a), Some(b)) => sign * (3.0 * s[i] - 4.0 * a + b) / (2.0 * h),
        (Some(a), None) => sign * (s[i] - a) / h,
        _ => 0.0,
    }
}

/// Cubic Hermite fill between known runs (matching S and its slope);
/// linear continuation beyond the outermost runs.
fn extend_1d(grid: &Grid, s: &mut [f64], known: &[bool]) {
    let h = grid.spacing();
    let idx: Vec<usize> = (0..s.len()).filter(|&i| known[i]).collect();
    let (Some(&first), Some(&last)) = (idx.first(), idx.last()) else {
        return;
    };
    let m_first = run_slope(s, known, first, -1, h);
    for i in 0..first {
        s[i] = s[first] - m_first * (first - i) as f64 * h;
    }
    let m_last = run_slope(s, known, last, 1, h);
    for i in (last + 1)..s.len() {
        s[i] = s[last] + m_last * (i - last) as f64 * h;
    }
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a + 1 {
            continue;
        }
        let len = (b - a) as f64 * h;
        let (sa, sb) = (s[a], s[b]);
        let ma = run_slope(s, known, a, 1, h) * len;
        let mb = run_slope(s, known, b, -1, h) * len;
        for i in (a + 1)..b {
            let t = (i - a) as f64 / (b - a) as f64;
            let (t2, t3) = (t * t, t * t * t);
            s[i] = (2.0 * t3 - 3.0 * t2 + 1.0) * sa
                + (t3 - 2.0 * t2 + t) * ma
                + (-2.0 * t3 + 3.0 * t2) * sb
                + (t3 - t2) * mb;
        }
    }
}

/// Minimises ‖∇²ₕS‖² over the unknown points (a discrete biharmonic fill,
/// which is C¹ across the support edges) by conjugate gradients.
fn extend_2d(grid: &Grid, s: &mut [f64], known: &[bool]) -> Result<()> {
    if !known.iter().any(|&k| k) {
        return Ok(());
    }
    let n = grid.n();
    // 5-point Laplacian on interior points
    let lap = |f: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let c = i * n + j;
                out[c] = f[c - n] + f[c + n] + f[c - 1] + f[c + 1] - 4.0 * f[c];
            }
        }
    };
    // the operator is symmetric on interior rows, so Lᵀ = L there
    let lap_t = |f: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let c = i * n + j;
                let v = f[c];
                out[c] -= 4.0 * v;
                out[c - n] += v;
                out[c + n] += v;
                out[c - 1] += v;
                out[c + 1] += v;
            }
        }
    };
    let len = s.len();
    let mut tmp = vec![0.0; len];
    let mut apply = |p: &[f64], out: &mut [f64]| {
        lap(p, &mut tmp);
        lap_t(&tmp, out);
        for (o, &k) in out.iter_mut().zip(known) {
            if k {
                *o = 0.0;
            }
        }
    };
    let mut r = vec![0.0; len];
    apply(s, &mut r);
    r.iter_mut().for_each(|v| *v = -*v);
    let mut p = r.clone();
    let mut ap = vec![0.0; len];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let rr0 = rr;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..CG_MAX_ITERS {
        if rr <= CG_TOL * CG_TOL * rr0 || rr == 0.0 {
            return Ok(());
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..len {
            s[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..len {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::InvalidInput("biharmonic fill of S did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian_amplitude, plane_wave_action};

    fn packet(g: Grid, x0: f64, p0: f64) -> PolarPair {
        let r = gaussian_amplitude(g, [x0, 0.0], 0.5).unwrap();
        PolarPair::new(r, plane_wave_action(g, [p0, 0.0])).unwrap()
    }

    #[test]
    fn empty_and_mismatched_inputs_rejected() {
        assert!(superpose_nonoverlapping(&[], &[]).is_err());
        let g = Grid::line(64, 40.0).unwrap();
        let a = packet(g, 0.0, 0.0);
        assert!(superpose_nonoverlapping(&[a], &[]).is_err());
    }

    #[test]
    fn overlapping_supports_rejected() {
        let g = Grid::line(256, 40.0).unwrap();
        let states = [packet(g, -1.0, 1.0), packet(g, 1.0, -1.0)];
        let c = [Complex64::new(1.0, 0.0); 2];
        assert!(matches!(
            superpose_nonoverlapping(&states, &c),
            Err(Error::SupportOverlap { .. })
        ));
    }

    #[test]
    fn single_state_scaled() {
        let g = Grid::line(64, 20.0).unwrap();
        let a = packet(g, 0.0, 1.0);
        let out = superpose_nonoverlapping(std::slice::from_ref(&a), &[Complex64::new(2.0, 0.0)]).unwrap();
        assert_eq!(out.r(), &a.r().scaled(2.0));
        assert_eq!(out.s(), a.s());
    }

    #[test]
    fn disjoint_pair_keeps_component_actions() {
        let g = Grid::line(512, 40.0).unwrap();
        let states = [packet(g, -5.0, 1.0), packet(g, 5.0, -1.0)];
        let c = [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, 0.3)];
        let out = superpose_nonoverlapping(&states, &c).unwrap();
        let i = g.nearest_index([-5.0, 0.0]);
        let j = g.nearest_index([5.0, 0.0]);
        assert_eq!(out.s().values()[i], states[0].s().values()[i]);
        assert!((out.s().values()[j] - (states[1].s().values()[j] + 0.3)).abs() < 1e-12);
        // the gap fill continues the velocity without a jump
        let v = crate::fields::FiniteDifference::new(g).gradient(out.s());
        let jumps = v[0].values().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        // (without the fill the jump would be the full 2·p0 swing)
        assert!(jumps < 0.2, "largest velocity jump {jumps}");
    }

    #[test]
    fn biharmonic_fill_reproduces_a_linear_action() {
        let g = Grid::square(32, 16.0).unwrap();
        let exact: Vec<f64> = (0..g.len()).map(|i| 0.7 * g.point(i)[0] - 0.2 * g.point(i)[1]).collect();
        let mut s = vec![0.0; g.len()];
        let mut known = vec![false; g.len()];
        for i in 0..g.len() {
            let p = g.point(i);
            // everything known except a disc in the middle
            if p[0] * p[0] + p[1] * p[1] > 9.0 {
                known[i] = true;
                s[i] = exact[i];
            }
        }
        extend_2d(&g, &mut s, &known).unwrap();
        let err = s.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "err={err}");
    }
}
