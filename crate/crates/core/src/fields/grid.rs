use crate::error::{Error, Result};

/// A point in the 1D or 2D domain. Components past `dim` are ignored and
/// kept at zero.
pub type Point = [f64; 2];

/// Uniform periodic lattice centred on the origin.
///
/// Axis `a` has coordinates `-extent/2 + i * spacing` for `i in 0..n`.
/// In 2D, samples are stored row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    extent: f64,
    hbar: f64,
    mass: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, extent: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self {
            dim,
            n,
            extent,
            hbar: 1.0,
            mass: 1.0,
        })
    }

    pub fn line(n: usize, extent: f64) -> Result<Self> {
        Self::new(1, n, extent)
    }

    pub fn square(n: usize, extent: f64) -> Result<Self> {
        Self::new(2, n, extent)
    }

    /// Replaces ħ and m (both default to 1).
    pub fn with_units(mut self, hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0 && mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "hbar and mass must be positive, got hbar={hbar} mass={mass}"
            )));
        }
        self.hbar = hbar;
        self.mass = mass;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Total number of samples, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.extent
    }

    /// Coordinate of index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.origin() + i as f64 * self.spacing()
    }

    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] * self.n + ij[1],
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let ij = self.unflatten(idx);
        match self.dim {
            1 => [self.coord(ij[0]), 0.0],
            _ => [self.coord(ij[0]), self.coord(ij[1])],
        }
    }

    /// Wraps a coordinate into `[-extent/2, extent/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.extent;
        let y = (x - self.origin()).rem_euclid(l);
        // rem_euclid can return l itself for tiny negative inputs
        let y = if y >= l { 0.0 } else { y };
        y + self.origin()
    }

    pub fn wrap_point(&self, p: Point) -> Point {
        let mut q = p;
        for c in q.iter_mut().take(self.dim) {
            *c = self.wrap(*c);
        }
        q
    }

    /// Minimal-image displacement along one axis.
    pub fn min_image(&self, d: f64) -> f64 {
        let l = self.extent;
        d - l * (d / l).round()
    }

    /// Flat index of the grid point nearest to `p` (periodic).
    pub fn nearest_index(&self, p: Point) -> usize {
        let dx = self.spacing();
        let mut ij = [0usize; 2];
        for a in 0..self.dim {
            let s = ((p[a] - self.origin()) / dx).round() as i64;
            ij[a] = s.rem_euclid(self.n as i64) as usize;
        }
        self.flatten(ij)
    }

    /// Angular wavenumbers in FFT order for one axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * std::f64::consts::PI / self.extent;
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { j - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Whether `p` lies inside the half-open box `[-extent/2, extent/2)` on every axis.
    pub fn contains(&self, p: Point) -> bool {
        (0..self.dim).all(|a| p[a] >= self.origin() && p[a] < -self.origin())
    }
}
