//! Density matrices over families of positive, mutually orthogonal states.
//!
//! Two non-negative functions can only be orthogonal if their product
//! vanishes pointwise, so a positive orthogonal basis is a family of
//! disjoint bumps. The constructor checks exactly that.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};

/// Tolerance on ⟨R_i|R_j⟩ = δ_ij.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance on the trace and on negative eigenvalues.
pub const TRACE_TOL: f64 = 1e-12;
pub const MAX_BASIS_SIZE: usize = 64;

#[derive(Debug, Clone)]
pub struct PositiveBasis {
    grid: Grid,
    members: Vec<ScalarField>,
}

impl PositiveBasis {
    pub fn new(members: Vec<ScalarField>) -> Result<Self> {
        let grid = match members.first() {
            Some(r) => *r.grid(),
            None => return Err(Error::InvalidInput("basis needs at least one state".into())),
        };
        if members.len() > MAX_BASIS_SIZE {
            return Err(Error::InvalidInput(format!(
                "basis has {} states, at most {MAX_BASIS_SIZE} supported",
                members.len()
            )));
        }
        for r in &members {
            if *r.grid() != grid {
                return Err(Error::InvalidInput("basis states live on different grids".into()));
            }
            if let Some((index, &value)) = r.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(Error::NegativeAmplitude { index, value });
            }
            let norm = r.inner(r);
            if (norm - 1.0).abs() > ORTHONORMAL_TOL {
                return Err(Error::InvalidInput(format!("basis state has norm {norm}, expected 1")));
            }
        }
        for i in 0..members.len() {
            for j in 0..i {
                let overlap = members[i].inner(&members[j]);
                if overlap > ORTHONORMAL_TOL {
                    return Err(Error::SupportOverlap {
                        overlap,
                        tolerance: ORTHONORMAL_TOL,
                    });
                }
            }
        }
        Ok(Self { grid, members })
    }

    /// Rescales each member to unit norm, then validates.
    pub fn normalized(members: Vec<ScalarField>) -> Result<Self> {
        let members = members
            .into_iter()
            .map(|r| {
                let n = r.inner(&r).sqrt();
                if n > 0.0 {
                    Ok(r.scaled(1.0 / n))
                } else {
                    Err(Error::InvalidInput("basis state is identically zero".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn members(&self) -> &[ScalarField] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// ∫R_i A R_j for all i, j.
    pub fn observable_matrix(&self, a: &ScalarField) -> Result<DMatrix<f64>> {
        if *a.grid() != self.grid {
            return Err(Error::InvalidInput("observable lives on a different grid".into()));
        }
        let n = self.len();
        let weighted: Vec<ScalarField> = self.members.iter().map(|r| r.zip_map(a, |x, y| x * y)).collect();
        Ok(DMatrix::from_fn(n, n, |i, j| weighted[i].inner(&self.members[j])))
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix<'a> {
    basis: &'a PositiveBasis,
    entries: DMatrix<f64>,
}

impl<'a> DensityMatrix<'a> {
    /// Checks symmetry, unit trace and positive semidefiniteness.
    pub fn new(basis: &'a PositiveBasis, entries: DMatrix<f64>) -> Result<Self> {
        let n = basis.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, basis has {n} states",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if (&entries - entries.transpose()).amax() > TRACE_TOL {
            return Err(Error::InvalidInput("matrix is not symmetric".into()));
        }
        let trace = entries.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!("trace is {trace}, expected 1")));
        }
        let dm = Self { basis, entries };
        let lowest = dm.eigenvalues().min();
        if lowest < -TRACE_TOL {
            return Err(Error::InvalidInput(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(dm)
    }

    pub fn basis(&self) -> &PositiveBasis {
        self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> nalgebra::DVector<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        nalgebra::DVector::from_vec(ev)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > tol).count()
    }

    /// Writes a `# basis ...` descriptor line followed by the matrix rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let g = self.basis.grid();
        let mut body = format!(
            "# basis states={} dim={} n={} extent={}\n",
            self.basis.len(),
            g.dim(),
            g.n(),
            g.extent()
        );
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }
}

fn check_weights(weights: &[f64], basis: &PositiveBasis) -> Result<()> {
    if weights.len() != basis.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} basis states",
            weights.len(),
            basis.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!("weight {w} is negative or non-finite")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidInput(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// ρ_ij = √(w_i w_j): the superposition Σ √w_i R_i.
pub fn pure_density<'a>(weights: &[f64], basis: &'a PositiveBasis) -> Result<DensityMatrix<'a>> {
    check_weights(weights, basis)?;
    let n = basis.len();
    let entries = DMatrix::from_fn(n, n, |i, j| (weights[i] * weights[j]).sqrt());
    DensityMatrix::new(basis, entries)
}

/// ρ = diag(w).
pub fn mixed_density<'a>(weights: &[f64], basis: &'a PositiveBasis) -> Result<DensityMatrix<'a>> {
    check_weights(weights, basis)?;
    DensityMatrix::new(basis, DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(weights)))
}

/// Tr(ρ Â) for a position-diagonal observable A(x).
pub fn expect_diagonal(dm: &DensityMatrix, a: &ScalarField) -> Result<f64> {
    let m = dm.basis.observable_matrix(a)?;
    Ok(dm.entries.component_mul(&m).sum())
}

/// Symmetrized two-particle density (R₁(x)R₂(y) + R₂(x)R₁(y))².
#[derive(Debug, Clone)]
pub struct ExchangeDensity {
    /// ρ(x, y) on the square grid built from the single-particle line.
    pub field: ScalarField,
    /// ∫∫ρ before normalization.
    pub norm: f64,
    /// 2 (∫R₁R₂)².
    pub exchange: f64,
}

/// Tolerance on the exchange integral.
pub const EXCHANGE_TOL: f64 = 1e-12;

/// Builds the symmetrized pair density of two one-dimensional states and
/// rejects the pair if the exchange part is not negligible.
pub fn exchange_density(r1: &ScalarField, r2: &ScalarField) -> Result<ExchangeDensity> {
    let g = *r1.grid();
    if *r2.grid() != g {
        return Err(Error::InvalidInput("states live on different grids".into()));
    }
    if g.dim() != 1 {
        return Err(Error::InvalidInput("pair density needs one-dimensional states".into()));
    }
    let overlap = r1.inner(r2);
    let exchange = 2.0 * overlap * overlap;
    if exchange > EXCHANGE_TOL {
        return Err(Error::SupportOverlap {
            overlap: exchange,
            tolerance: EXCHANGE_TOL,
        });
    }
    let n = g.n();
    let pair_grid = Grid::square(n, g.extent())?.with_units(g.hbar(), g.mass())?;
    let (a, b) = (r1.values(), r2.values());
    // index = i·n + j with i the x index; matches Grid::flatten([i, j])
    let values: Vec<f64> = (0..n * n)
        .map(|idx| {
            let [i, j] = pair_grid.unflatten(idx);
            let v = a[i] * b[j] + b[i] * a[j];
            v * v
        })
        .collect();
    let field = ScalarField::new(pair_grid, values)?;
    let norm = field.integral();
    Ok(ExchangeDensity { field, norm, exchange })
}
