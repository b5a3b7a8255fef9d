//! Winding numbers of S around closed loops, the Bohr condition and the
//! circular-orbit Coulomb spectrum.
//!
//! A loop increment of S is read from its raw difference where that is
//! smaller than πħ. Larger jumps are branch cuts in how S was stored: the
//! increment is then taken from the wrapped difference of e^{iS/ħ} if it
//! agrees with the neighbouring slope, otherwise from the neighbouring
//! slope itself. A jump that is not a multiple of 2πħ therefore shows up
//! as a fractional winding instead of being silently rounded away.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};

/// Samples per loop used by the spectrum cross-check.
pub const DEFAULT_LOOP_SAMPLES: usize = 256;
/// Residual above which a winding is treated as non-integral.
pub const WINDING_TOL: f64 = 1e-6;

/// Closed loop of grid indices. The last point connects back to the first;
/// consecutive points are neighbours (periodic, diagonal steps allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath {
    grid: Grid,
    indices: Vec<usize>,
}

impl LoopPath {
    pub fn from_indices(grid: Grid, indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 3 {
            return Err(Error::InvalidInput("a loop needs at least 3 points".into()));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= grid.len()) {
            return Err(Error::InvalidInput(format!("loop index {i} outside the grid")));
        }
        let n = grid.n() as i64;
        let step = |a: usize, b: usize| -> i64 {
            let (ia, ib) = (grid.unflatten(a), grid.unflatten(b));
            (0..grid.dim())
                .map(|ax| {
                    let d = (ib[ax] as i64 - ia[ax] as i64).rem_euclid(n);
                    d.min(n - d)
                })
                .max()
                .unwrap_or(0)
        };
        for k in 0..indices.len() {
            let (a, b) = (indices[k], indices[(k + 1) % indices.len()]);
            if step(a, b) != 1 {
                return Err(Error::InvalidInput(format!("loop points {a} and {b} are not neighbours")));
            }
        }
        Ok(Self { grid, indices })
    }

    /// Every point of a 1D periodic grid, read as an angle grid.
    pub fn angular(grid: Grid) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidInput("angular loops need a 1D grid".into()));
        }
        Self::from_indices(grid, (0..grid.n()).collect())
    }

    /// Counter-clockwise square ring of half-side `half` cells around `center`.
    pub fn square_ring(grid: Grid, center: [usize; 2], half: usize) -> Result<Self> {
        if grid.dim() != 2 || half == 0 || 2 * half >= grid.n() {
            return Err(Error::InvalidInput(format!("cannot fit a ring of half-side {half}")));
        }
        let n = grid.n() as i64;
        let (ci, cj, h) = (center[0] as i64, center[1] as i64, half as i64);
        let mut ij = Vec::with_capacity(8 * half);
        // first index is x, second is y
        for d in -h..h {
            ij.push((ci + d, cj - h));
        }
        for d in -h..h {
            ij.push((ci + h, cj + d));
        }
        for d in -h..h {
            ij.push((ci - d, cj + h));
        }
        for d in -h..h {
            ij.push((ci - h, cj - d));
        }
        let indices = ij
            .into_iter()
            .map(|(i, j)| grid.flatten([i.rem_euclid(n) as usize, j.rem_euclid(n) as usize]))
            .collect();
        Self::from_indices(grid, indices)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The same loop started at position `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut indices = self.indices.clone();
        let len = indices.len();
        indices.rotate_left(k % len);
        Self { grid: self.grid, indices }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub n: i64,
    /// Distance of ∮dS/2πħ from `n`, in [0, 0.5].
    pub residual: f64,
}

impl Winding {
    /// The winding number, or an error when ∮dS is not a multiple of 2πħ.
    pub fn check(&self, tol: f64) -> Result<i64> {
        if self.residual > tol {
            return Err(Error::Winding(format!(
                "loop integral is {} off an integer multiple of 2πħ",
                self.residual
            )));
        }
        Ok(self.n)
    }
}

fn wrap_phase(d: f64, hbar: f64) -> f64 {
    let period = 2.0 * PI * hbar;
    d - period * (d / period).round()
}

/// Winding of S around `path`. Non-finite S marks points where S is undefined.
pub fn winding_number(s: &ScalarField, path: &LoopPath, hbar: f64) -> Result<Winding> {
    if *s.grid() != path.grid {
        return Err(Error::InvalidInput("S and loop live on different grids".into()));
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
    }
    let vals: Vec<f64> = path.indices.iter().map(|&i| s.values()[i]).collect();
    if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::Winding(format!("S undefined on the loop at index {}", path.indices[k])));
    }
    let len = vals.len();
    let raw: Vec<f64> = (0..len).map(|k| vals[(k + 1) % len] - vals[k]).collect();
    let cut: Vec<bool> = raw.iter().map(|d| d.abs() >= PI * hbar).collect();
    let mut total = 0.0;
    for k in 0..len {
        if !cut[k] {
            total += raw[k];
            continue;
        }
        let before = (1..len).map(|j| (k + len - j) % len).find(|&j| !cut[j]);
        let after = (1..len).map(|j| (k + j) % len).find(|&j| !cut[j]);
        let slope = match (before, after) {
            (Some(a), Some(b)) => 0.5 * (raw[a] + raw[b]),
            _ => return Err(Error::Winding("every loop segment jumps by more than πħ".into())),
        };
        if slope.abs() >= 0.5 * PI * hbar {
            return Err(Error::Winding(format!(
                "aliasing: S changes by {slope:e} per segment, loop sampling is too coarse"
            )));
        }
        let wrapped = wrap_phase(raw[k], hbar);
        total += if (wrapped - slope).abs() < 0.5 * PI * hbar { wrapped } else { slope };
    }
    let w = total / (2.0 * PI * hbar);
    let n = w.round();
    Ok(Winding {
        n: n as i64,
        residual: (w - n).abs(),
    })
}

/// Nearest integer to L/ħ and the distance from it.
pub fn bohr_check(l: f64, hbar: f64) -> (i64, f64) {
    let q = l / hbar;
    let n = q.round();
    (n as i64, (q - n).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrLevel {
    pub n: u32,
    pub radius: f64,
    pub energy: f64,
    /// S = nħφ on the orbit winds n times and satisfies the Hamilton–Jacobi
    /// equation with E = −∂ₜS.
    pub winding_ok: bool,
}

/// Relative tolerance of the orbit cross-check.
const ORBIT_TOL: f64 = 1e-10;

/// Circular Coulomb orbits in V = −k/r with mvr = nħ: r_n = n²ħ²/mk and
/// E_n = −mk²/2ħ²n².
pub fn coulomb_circular_spectrum(k: f64, m: f64, hbar: f64, n_max: u32) -> Result<Vec<BohrLevel>> {
    if !(k > 0.0 && m > 0.0 && hbar > 0.0 && n_max >= 1) {
        return Err(Error::InvalidInput(format!(
            "need k, m, hbar > 0 and n_max >= 1, got k={k} m={m} hbar={hbar} n_max={n_max}"
        )));
    }
    let angle = Grid::line(DEFAULT_LOOP_SAMPLES, 2.0 * PI)?.with_units(hbar, m)?;
    let path = LoopPath::angular(angle)?;
    let dphi = angle.spacing();
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let radius = nf * nf * hbar * hbar / (m * k);
            let energy = -m * k * k / (2.0 * hbar * hbar * nf * nf);
            let s = ScalarField::from_fn(angle, |p| nf * hbar * p[0])?;
            let winding = winding_number(&s, &path, hbar)?;
            // HJ on the circle: E = (∂_φS / r)²/2m − k/r, with ∂_φS from wrapped increments
            let worst = (0..angle.n())
                .map(|i| {
                    let ds = wrap_phase(s.values()[(i + 1) % angle.n()] - s.values()[i], hbar) / dphi;
                    let e = (ds / radius).powi(2) / (2.0 * m) - k / radius;
                    (e - energy).abs()
                })
                .fold(0.0, f64::max);
            let winding_ok = winding.n == n as i64 && winding.residual < ORBIT_TOL && worst <= ORBIT_TOL * energy.abs();
            Ok(BohrLevel {
                n,
                radius,
                energy,
                winding_ok,
            })
        })
        .collect()
}

/// CSV with header `n,r_n,E_n,winding_ok`.
pub fn write_spectrum_csv(path: impl AsRef<Path>, levels: &[BohrLevel]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::from("n,r_n,E_n,winding_ok\n");
    for l in levels {
        body.push_str(&format!("{},{:.17e},{:.17e},{}\n", l.n, l.radius, l.energy, l.winding_ok));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
