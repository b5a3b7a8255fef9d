//! Local Lagrange interpolation of gridded fields at off-grid points.

use super::grid::{Grid, Point};

/// How stencils treat the domain edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Indices wrap around (periodic fields such as R or ψ).
    Periodic,
    /// Stencils are shifted to stay inside the grid (non-periodic fields
    /// such as the gradient of an unwrapped S).
    Clamped,
}

/// Stencil start index (may be negative for periodic) and weights for one axis.
#[inline]
fn axis_stencil(grid: &Grid, x: f64, points: usize, boundary: Boundary, w: &mut [f64; 8]) -> i64 {
    let s = (x - grid.origin()) / grid.spacing();
    let half = points as i64 / 2;
    let mut start = s.floor() as i64 - (half - 1);
    if boundary == Boundary::Clamped {
        start = start.clamp(0, grid.n() as i64 - points as i64);
    }
    for (j, wj) in w.iter_mut().enumerate().take(points) {
        let xj = (start + j as i64) as f64;
        let mut prod = 1.0;
        for m in 0..points {
            if m != j {
                let xm = (start + m as i64) as f64;
                prod *= (s - xm) / (xj - xm);
            }
        }
        *wj = prod;
    }
    start
}

#[inline]
fn resolve(grid: &Grid, i: i64) -> usize {
    i.rem_euclid(grid.n() as i64) as usize
}

/// Interpolates `values` (sampled on `grid`) at `p` with a `points`-wide
/// Lagrange stencil per axis. `points` must be even and at most 8.
pub fn interpolate(grid: &Grid, values: &[f64], p: Point, points: usize, boundary: Boundary) -> f64 {
    let mut out = [0.0];
    interpolate_many(grid, &[values], p, points, boundary, &mut out);
    out[0]
}

/// Like [`interpolate`] for several fields sharing one stencil; writes one
/// value per field into `out`.
pub fn interpolate_many(
    grid: &Grid,
    fields: &[&[f64]],
    p: Point,
    points: usize,
    boundary: Boundary,
    out: &mut [f64],
) {
    debug_assert!((2..=8).contains(&points) && points.is_multiple_of(2));
    debug_assert!(out.len() >= fields.len());
    let mut w0 = [0.0; 8];
    let s0 = axis_stencil(grid, p[0], points, boundary, &mut w0);
    out.iter_mut().for_each(|o| *o = 0.0);
    if grid.dim() == 1 {
        for (j, wj) in w0.iter().enumerate().take(points) {
            let idx = resolve(grid, s0 + j as i64);
            for (o, f) in out.iter_mut().zip(fields) {
                *o += wj * f[idx];
            }
        }
        return;
    }
    let n = grid.n();
    let mut w1 = [0.0; 8];
    let s1 = axis_stencil(grid, p[1], points, boundary, &mut w1);
    let mut cols = [0usize; 8];
    for (b, c) in cols.iter_mut().enumerate().take(points) {
        *c = resolve(grid, s1 + b as i64);
    }
    for (a, wa) in w0.iter().enumerate().take(points) {
        let row = resolve(grid, s0 + a as i64) * n;
        for (o, f) in out.iter_mut().zip(fields) {
            let mut line = 0.0;
            for (wb, &c) in w1.iter().zip(&cols).take(points) {
                line += wb * f[row + c];
            }
            *o += wa * line;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = Grid::line(32, 8.0).unwrap();
        let f: Vec<f64> = (0..32)
            .map(|i| {
                let x = g.coord(i);
                1.0 + x - 0.5 * x * x + 0.1 * x * x * x
            })
            .collect();
        for &x in &[-1.234, 0.0, 0.77, 2.5] {
            let v = interpolate(&g, &f, [x, 0.0], 4, Boundary::Clamped);
            assert!((v - (1.0 + x - 0.5 * x * x + 0.1 * x * x * x)).abs() < 1e-12);
        }
        // at the very edge the clamped stencil extrapolates the same cubic
        let x = 3.9;
        let v = interpolate(&g, &f, [x, 0.0], 4, Boundary::Clamped);
        assert!((v - (1.0 + x - 0.5 * x * x + 0.1 * x * x * x)).abs() < 1e-10);
    }

    #[test]
    fn periodic_wraps() {
        let g = Grid::line(64, 2.0 * std::f64::consts::PI).unwrap();
        let f: Vec<f64> = (0..64).map(|i| g.coord(i).cos()).collect();
        let x = 3.13;
        let v = interpolate(&g, &f, [x, 0.0], 8, Boundary::Periodic);
        assert!((v - x.cos()).abs() < 1e-9);
    }

    #[test]
    fn bilinear_exact_in_2d() {
        let g = Grid::square(16, 4.0).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                2.0 * p[0] - p[1] + p[0] * p[1]
            })
            .collect();
        let p = [0.31, -0.77];
        let v = interpolate(&g, &f, p, 4, Boundary::Clamped);
        assert!((v - (2.0 * p[0] - p[1] + p[0] * p[1])).abs() < 1e-12);
    }
}
