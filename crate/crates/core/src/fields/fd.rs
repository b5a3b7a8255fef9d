//! Non-periodic finite differences for fields that are not periodic on the
//! grid, such as an unwrapped action S.
//!
//! Seven-point stencils everywhere: central in the interior, shifted
//! one-sided near the edges. Every stencil is exact on polynomials of
//! degree six or less.

use super::field::ScalarField;
use super::grid::Grid;

const WIDTH: usize = 7;
const HALF: usize = WIDTH / 2;

/// Fornberg's algorithm: weights of the derivatives up to `max_order` at
/// `x0` over `nodes`. Returns `w[order][node]`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Precomputed first/second derivative stencils for one grid.
#[derive(Debug, Clone)]
pub struct FiniteDifference {
    grid: Grid,
    // indexed by the evaluation point's position inside the stencil
    d1: [[f64; WIDTH]; WIDTH],
    d2: [[f64; WIDTH]; WIDTH],
}

impl FiniteDifference {
    pub fn new(grid: Grid) -> Self {
        let h = grid.spacing();
        let nodes: Vec<f64> = (0..WIDTH).map(|j| j as f64).collect();
        let mut d1 = [[0.0; WIDTH]; WIDTH];
        let mut d2 = [[0.0; WIDTH]; WIDTH];
        for q in 0..WIDTH {
            let w = fornberg_weights(q as f64, &nodes, 2);
            for j in 0..WIDTH {
                d1[q][j] = w[1][j] / h;
                d2[q][j] = w[2][j] / (h * h);
            }
        }
        Self { grid, d1, d2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn stencil_start(&self, i: usize) -> usize {
        let n = self.grid.n();
        i.saturating_sub(HALF).min(n - WIDTH)
    }

    /// Applies `weights` along `axis` at every point.
    fn apply(&self, f: &[f64], axis: usize, table: &[[f64; WIDTH]; WIDTH], out: &mut [f64]) {
        let n = self.grid.n();
        let (stride, lines) = match (self.grid.dim(), axis) {
            (1, _) => (1, 1),
            (_, 0) => (n, n),
            _ => (1, n),
        };
        for line in 0..lines {
            let base = match (self.grid.dim(), axis) {
                (1, _) => 0,
                (_, 0) => line,
                _ => line * n,
            };
            for i in 0..n {
                let s0 = self.stencil_start(i);
                let w = &table[i - s0];
                let mut acc = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * f[base + (s0 + j) * stride];
                }
                out[base + i * stride] = acc;
            }
        }
    }

    pub fn derivative(&self, f: &ScalarField, axis: usize) -> ScalarField {
        let mut out = vec![0.0; f.values().len()];
        self.apply(f.values(), axis, &self.d1, &mut out);
        ScalarField::from_raw(self.grid, out)
    }

    pub fn gradient(&self, f: &ScalarField) -> Vec<ScalarField> {
        (0..self.grid.dim()).map(|a| self.derivative(f, a)).collect()
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let len = f.values().len();
        let mut acc = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        for axis in 0..self.grid.dim() {
            self.apply(f.values(), axis, &self.d2, &mut tmp);
            for (a, t) in acc.iter_mut().zip(&tmp) {
                *a += t;
            }
        }
        ScalarField::from_raw(self.grid, acc)
    }
}
