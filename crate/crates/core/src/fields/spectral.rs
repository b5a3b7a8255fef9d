//! Spectral derivatives on the periodic grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{ComplexField, ScalarField};
use super::grid::Grid;

/// Forward/inverse DFT plans for one grid, plus its wavenumbers.
///
/// Transforms are unnormalized forward and `1/N`-normalized inverse, so
/// `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        Self {
            grid,
            forward,
            inverse,
            k: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Per-axis wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.forward);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inverse);
        let scale = 1.0 / buf.len() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        // rows (fastest axis); in 1D this is the whole buffer
        plan.process(buf);
        if self.grid.dim() == 2 {
            transpose_square(buf, n);
            plan.process(buf);
            transpose_square(buf, n);
        }
    }

    /// Wavevector components at a flat index of the transformed buffer.
    pub fn k_at(&self, idx: usize) -> [f64; 2] {
        let ij = self.grid.unflatten(idx);
        match self.grid.dim() {
            1 => [self.k[ij[0]], 0.0],
            _ => [self.k[ij[0]], self.k[ij[1]]],
        }
    }

    /// |k|² at a flat index.
    pub fn k2_at(&self, idx: usize) -> f64 {
        let k = self.k_at(idx);
        k[0] * k[0] + k[1] * k[1]
    }

    /// Wavenumber used for odd derivatives: the Nyquist mode is dropped
    /// so real fields stay real.
    fn k_odd(&self, idx: usize, axis: usize) -> f64 {
        let ij = self.grid.unflatten(idx);
        let j = ij[axis];
        if j == self.grid.n() / 2 {
            0.0
        } else {
            self.k[j]
        }
    }

    pub fn gradient_complex(&self, psi: &ComplexField) -> Vec<ComplexField> {
        let mut hat = psi.values().to_vec();
        self.forward(&mut hat);
        (0..self.grid.dim())
            .map(|axis| {
                let mut d: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| z * Complex64::new(0.0, self.k_odd(i, axis)))
                    .collect();
                self.inverse(&mut d);
                ComplexField::from_raw(self.grid, d)
            })
            .collect()
    }

    pub fn gradient(&self, f: &ScalarField) -> Vec<ScalarField> {
        let psi = to_complex(f);
        self.gradient_complex(&psi)
            .into_iter()
            .map(|c| ScalarField::from_raw(self.grid, c.values().iter().map(|z| z.re).collect()))
            .collect()
    }

    pub fn laplacian_complex(&self, psi: &ComplexField) -> ComplexField {
        let mut hat = psi.values().to_vec();
        self.forward(&mut hat);
        for (i, z) in hat.iter_mut().enumerate() {
            *z *= -self.k2_at(i);
        }
        self.inverse(&mut hat);
        ComplexField::from_raw(self.grid, hat)
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let c = self.laplacian_complex(&to_complex(f));
        ScalarField::from_raw(self.grid, c.values().iter().map(|z| z.re).collect())
    }
}

fn to_complex(f: &ScalarField) -> ComplexField {
    ComplexField::from_raw(
        *f.grid(),
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    )
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Spectral gradient of a periodic field, one component per axis.
pub fn gradient(f: &ScalarField) -> Vec<ScalarField> {
    Spectral::new(*f.grid()).gradient(f)
}

/// Spectral Laplacian of a periodic field.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    Spectral::new(*f.grid()).laplacian(f)
}

/// Grid Riemann sum of a density.
pub fn norm(rho: &ScalarField) -> f64 {
    rho.norm()
}
