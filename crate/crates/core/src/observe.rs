//! Observers invoked by the solvers' evolve loops, and the observation log.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{HasDensity, ScalarField};

/// Called by `evolve_*` every `every()` steps (including step 0).
pub trait Observer<S> {
    fn every(&self) -> usize;
    fn observe(&mut self, step: usize, t: f64, state: &S) -> Result<()>;
}

pub(crate) fn notify<S>(observers: &mut [&mut dyn Observer<S>], step: usize, t: f64, state: &S) -> Result<()> {
    for obs in observers.iter_mut() {
        let every = obs.every().max(1);
        if step.is_multiple_of(every) {
            obs.observe(step, t, state)?;
        }
    }
    Ok(())
}

/// Norm, mean position and width per axis of a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean: Vec<f64>,
    pub width: Vec<f64>,
}

/// Moments of ρ/∫ρ. Positions are grid coordinates (no periodic unwrapping),
/// so the density should be well inside the box.
pub fn moments(rho: &ScalarField) -> Result<Moments> {
    let grid = *rho.grid();
    let norm = rho.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("density has zero norm".into()));
    }
    let dim = grid.dim();
    let dv = grid.cell_volume();
    let mut m1 = [0.0; 2];
    let mut m2 = [0.0; 2];
    for (i, &r) in rho.values().iter().enumerate() {
        let p = grid.point(i);
        for a in 0..dim {
            m1[a] += r * p[a];
            m2[a] += r * p[a] * p[a];
        }
    }
    let mut mean = Vec::with_capacity(dim);
    let mut width = Vec::with_capacity(dim);
    for a in 0..dim {
        let mu = m1[a] * dv / norm;
        let var = (m2[a] * dv / norm - mu * mu).max(0.0);
        mean.push(mu);
        width.push(var.sqrt());
    }
    Ok(Moments { norm, mean, width })
}

/// √(⟨x²⟩ - ⟨x⟩²) per axis under ρ/∫ρ.
pub fn packet_width(rho: &ScalarField) -> Result<Vec<f64>> {
    Ok(moments(rho)?.width)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub norm: f64,
    pub mean: Vec<f64>,
    pub width: Vec<f64>,
    pub extra: Vec<f64>,
}

/// Observation log: one row of moments per observation, plus event lines
/// (caustics) that are written as `#` comments.
#[derive(Debug, Clone, Default)]
pub struct ObservationLog {
    every: usize,
    pub rows: Vec<LogRow>,
    pub extra_names: Vec<String>,
    pub events: Vec<String>,
}

impl ObservationLog {
    pub fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            ..Default::default()
        }
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let dim = self.rows.first().map(|r| r.mean.len()).unwrap_or(1);
        let axes = ["x", "y"];
        let mut header = vec!["t".to_string(), "norm".to_string()];
        header.extend((0..dim).map(|a| format!("mean_{}", axes[a])));
        header.extend((0..dim).map(|a| format!("width_{}", axes[a])));
        header.extend(self.extra_names.iter().cloned());
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for row in &self.rows {
            let mut cols = vec![format!("{}", row.t), format!("{:e}", row.norm)];
            cols.extend(row.mean.iter().map(|v| format!("{v:e}")));
            cols.extend(row.width.iter().map(|v| format!("{v:e}")));
            cols.extend(row.extra.iter().map(|v| format!("{v:e}")));
            writeln!(w, "{}", cols.join(",")).map_err(io)?;
        }
        for ev in &self.events {
            writeln!(w, "# {ev}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

impl<S: HasDensity> Observer<S> for ObservationLog {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, _step: usize, t: f64, state: &S) -> Result<()> {
        let m = moments(&state.density())?;
        self.rows.push(LogRow {
            t,
            norm: m.norm,
            mean: m.mean,
            width: m.width,
            extra: Vec::new(),
        });
        Ok(())
    }
}

/// Stores `map(state)` every `every` steps.
pub struct FrameRecorder<S, T, F: FnMut(&S) -> Result<T>> {
    every: usize,
    map: F,
    pub frames: Vec<(f64, T)>,
    _state: std::marker::PhantomData<fn(&S)>,
}

impl<S, T, F: FnMut(&S) -> Result<T>> FrameRecorder<S, T, F> {
    pub fn new(every: usize, map: F) -> Self {
        Self {
            every: every.max(1),
            map,
            frames: Vec::new(),
            _state: std::marker::PhantomData,
        }
    }

    pub fn into_frames(self) -> Vec<(f64, T)> {
        self.frames
    }
}

impl<S, T, F: FnMut(&S) -> Result<T>> Observer<S> for FrameRecorder<S, T, F> {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, _step: usize, t: f64, state: &S) -> Result<()> {
        let v = (self.map)(state)?;
        self.frames.push((t, v));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian_amplitude, Grid};

    #[test]
    fn gaussian_width_recovered() {
        let g = Grid::line(1024, 40.0).unwrap();
        let rho = gaussian_amplitude(g, [1.5, 0.0], 0.8).unwrap().square();
        let m = moments(&rho).unwrap();
        assert!((m.width[0] - 0.8).abs() < 1e-6);
        assert!((m.mean[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn narrow_packet_width_within_ten_percent() {
        let g = Grid::line(1024, 40.0).unwrap();
        let w = 2.0 * g.spacing();
        let rho = gaussian_amplitude(g, [0.0; 2], w).unwrap().square();
        let est = packet_width(&rho).unwrap()[0];
        assert!((est - w).abs() < 0.1 * w);
    }

    #[test]
    fn two_bump_width_exceeds_half_separation() {
        let g = Grid::line(512, 40.0).unwrap();
        let a = gaussian_amplitude(g, [-3.0, 0.0], 0.5).unwrap().square();
        let b = gaussian_amplitude(g, [3.0, 0.0], 0.5).unwrap().square();
        let rho = a.zip_map(&b, |x, y| x + y);
        assert!(packet_width(&rho).unwrap()[0] > 3.0);
    }

    #[test]
    fn zero_density_rejected() {
        let g = Grid::line(16, 1.0).unwrap();
        assert!(moments(&ScalarField::zeros(g)).is_err());
    }
}
