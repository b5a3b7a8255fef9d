use std::fmt;
use std::sync::Arc;

use super::fd::FiniteDifference;
use super::field::ScalarField;
use super::grid::{Grid, Point};
use super::interp::{interpolate, Boundary};
use crate::error::{Error, Result};

/// Rule producing V at a point and time.
pub type PotentialFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PotentialKind {
    Zero,
    Constant(f64),
    /// V = ½ m ω² |x - center|².
    Harmonic { omega: f64, center: Point },
    /// Uniform force F: V = -F·x.
    Linear { force: Point },
    /// Softened attraction V = -k / √(r² + ε²).
    Coulomb { k: f64, softening: f64 },
    /// Static samples on the grid.
    Sampled(Vec<f64>),
    TimeDependent(PotentialFn),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Harmonic { omega, center } => write!(f, "Harmonic(omega={omega}, center={center:?})"),
            Self::Linear { force } => write!(f, "Linear(force={force:?})"),
            Self::Coulomb { k, softening } => write!(f, "Coulomb(k={k}, softening={softening})"),
            Self::Sampled(_) => write!(f, "Sampled"),
            Self::TimeDependent(_) => write!(f, "TimeDependent"),
        }
    }
}

/// External potential V(x, t) on a grid.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Grid,
    kind: PotentialKind,
    sampled_gradient: Option<Vec<ScalarField>>,
}

impl Potential {
    pub fn new(grid: Grid, kind: PotentialKind) -> Result<Self> {
        let mut sampled_gradient = None;
        match &kind {
            PotentialKind::Sampled(v) => {
                let field = ScalarField::new(grid, v.clone())?;
                sampled_gradient = Some(FiniteDifference::new(grid).gradient(&field));
            }
            PotentialKind::Harmonic { omega, .. } if !(omega.is_finite() && *omega > 0.0) => {
                return Err(Error::InvalidInput(format!("harmonic omega must be positive, got {omega}")));
            }
            PotentialKind::Coulomb { k, softening } if !(*k > 0.0 && *softening > 0.0) => {
                return Err(Error::InvalidInput("coulomb k and softening must be positive".into()));
            }
            _ => {}
        }
        let pot = Self {
            grid,
            kind,
            sampled_gradient,
        };
        // finiteness on the whole grid at t = 0
        pot.values_at(0.0)?;
        Ok(pot)
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            grid,
            kind: PotentialKind::Zero,
            sampled_gradient: None,
        }
    }

    pub fn harmonic(grid: Grid, omega: f64) -> Result<Self> {
        Self::new(grid, PotentialKind::Harmonic { omega, center: [0.0; 2] })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.kind, PotentialKind::TimeDependent(_))
    }

    /// V at an arbitrary point. Sampled potentials are interpolated.
    pub fn value(&self, p: Point, t: f64) -> f64 {
        let dim = self.grid.dim();
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(c) => *c,
            PotentialKind::Harmonic { omega, center } => {
                let r2: f64 = (0..dim).map(|a| (p[a] - center[a]).powi(2)).sum();
                0.5 * self.grid.mass() * omega * omega * r2
            }
            PotentialKind::Linear { force } => -(0..dim).map(|a| force[a] * p[a]).sum::<f64>(),
            PotentialKind::Coulomb { k, softening } => {
                let r2: f64 = (0..dim).map(|a| p[a] * p[a]).sum();
                -k / (r2 + softening * softening).sqrt()
            }
            PotentialKind::Sampled(v) => interpolate(&self.grid, v, p, 4, Boundary::Clamped),
            PotentialKind::TimeDependent(f) => f(p, t),
        }
    }

    /// V sampled on the grid at time `t`.
    pub fn values_at(&self, t: f64) -> Result<ScalarField> {
        match &self.kind {
            PotentialKind::Sampled(v) => ScalarField::new(self.grid, v.clone()),
            _ => {
                let values = (0..self.grid.len())
                    .map(|i| self.value(self.grid.point(i), t))
                    .collect();
                ScalarField::new(self.grid, values)
            }
        }
    }

    /// ∇V at a point.
    pub fn gradient(&self, p: Point, t: f64) -> [f64; 2] {
        let dim = self.grid.dim();
        let mut g = [0.0; 2];
        match &self.kind {
            PotentialKind::Zero | PotentialKind::Constant(_) => {}
            PotentialKind::Harmonic { omega, center } => {
                for a in 0..dim {
                    g[a] = self.grid.mass() * omega * omega * (p[a] - center[a]);
                }
            }
            PotentialKind::Linear { force } => {
                for a in 0..dim {
                    g[a] = -force[a];
                }
            }
            PotentialKind::Coulomb { k, softening } => {
                let r2: f64 = (0..dim).map(|a| p[a] * p[a]).sum();
                let d = (r2 + softening * softening).powf(1.5);
                for a in 0..dim {
                    g[a] = k * p[a] / d;
                }
            }
            PotentialKind::Sampled(_) => {
                let grads = self.sampled_gradient.as_ref().expect("sampled gradient cached");
                for a in 0..dim {
                    g[a] = interpolate(&self.grid, grads[a].values(), p, 4, Boundary::Clamped);
                }
            }
            PotentialKind::TimeDependent(f) => {
                let h = 1e-5 * self.grid.spacing().max(1e-3);
                for a in 0..dim {
                    let mut lo = p;
                    let mut hi = p;
                    lo[a] -= h;
                    hi[a] += h;
                    g[a] = (f(hi, t) - f(lo, t)) / (2.0 * h);
                }
            }
        }
        g
    }
}
