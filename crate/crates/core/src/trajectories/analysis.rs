//! Histograms against ρ, crest tracking, the two-position momentum
//! estimate, and CSV exports.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Trajectory, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::fields::{Grid, Point, ScalarField};

pub const HISTOGRAM_BINS: usize = 64;

/// Per-axis bin range [lo, hi).
type Range = (f64, f64);

/// (bin, fraction) pairs for the overlap of grid cell `i` with the bins.
fn cell_overlaps(grid: &Grid, i: usize, range: Range, bins: usize) -> Vec<(usize, f64)> {
    let h = grid.spacing();
    let width = (range.1 - range.0) / bins as f64;
    let a = grid.coord(i) - 0.5 * h;
    let b = a + h;
    let mut out = Vec::new();
    let first = ((a - range.0) / width).floor().max(0.0) as usize;
    let last = (((b - range.0) / width).floor() as isize).min(bins as isize - 1);
    if last < 0 {
        return out;
    }
    for k in first..=(last as usize) {
        let lo = range.0 + k as f64 * width;
        let ov = (b.min(lo + width) - a.max(lo)).max(0.0);
        if ov > 0.0 {
            out.push((k, ov / h));
        }
    }
    out
}

/// Bin index of a coordinate, after wrapping it to the default cell cover
/// when `wrap` is set.
fn bin_of(x: f64, range: Range, bins: usize, wrap: Option<f64>) -> Option<usize> {
    let x = match wrap {
        Some(l) => range.0 + (x - range.0).rem_euclid(l),
        None => x,
    };
    if x < range.0 || x >= range.1 {
        return None;
    }
    Some((((x - range.0) / (range.1 - range.0)) * bins as f64).floor().min(bins as f64 - 1.0) as usize)
}

/// L1 distance between the sample histogram and the binned ρ/∫ρ, with
/// `bins` bins per axis over `window` (per-axis ranges) or the whole box.
/// Mass outside the window is compared as one extra bin.
pub fn histogram_l1(samples: &[Point], rho: &ScalarField, bins: usize, window: Option<[Range; 2]>) -> Result<f64> {
    if samples.is_empty() || bins == 0 {
        return Err(Error::InvalidInput("histogram needs samples and bins".into()));
    }
    let grid = *rho.grid();
    let total = rho.integral();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("density has zero norm".into()));
    }
    let dim = grid.dim();
    let h = grid.spacing();
    let cover = (grid.origin() - 0.5 * h, grid.origin() - 0.5 * h + grid.extent());
    let (ranges, wrap) = match window {
        Some(w) => (w, None),
        None => ([cover, cover], Some(grid.extent())),
    };
    let nbins = bins.pow(dim as u32);
    let mut model = vec![0.0; nbins];
    let dv = grid.cell_volume();
    for (i, &v) in rho.values().iter().enumerate() {
        let mass = v * dv / total;
        let ij = grid.unflatten(i);
        let ov0 = cell_overlaps(&grid, ij[0], ranges[0], bins);
        if dim == 1 {
            for (k, f) in ov0 {
                model[k] += mass * f;
            }
        } else {
            let ov1 = cell_overlaps(&grid, ij[1], ranges[1], bins);
            for &(k0, f0) in &ov0 {
                for &(k1, f1) in &ov1 {
                    model[k0 * bins + k1] += mass * f0 * f1;
                }
            }
        }
    }
    let model_out = 1.0 - model.iter().sum::<f64>();
    let mut hist = vec![0.0; nbins];
    let mut outside = 0.0;
    let w = 1.0 / samples.len() as f64;
    for p in samples {
        let b0 = bin_of(p[0], ranges[0], bins, wrap);
        let b = if dim == 1 {
            b0
        } else {
            b0.zip(bin_of(p[1], ranges[1], bins, wrap)).map(|(a, b)| a * bins + b)
        };
        match b {
            Some(k) => hist[k] += w,
            None => outside += w,
        }
    }
    Ok(hist.iter().zip(&model).map(|(a, b)| (a - b).abs()).sum::<f64>() + (outside - model_out.max(0.0)).abs())
}

/// Position at time `t` by 4-point Lagrange interpolation in time over
/// the recorded samples (unwrapped locally by minimal image).
fn position_at(traj: &Trajectory, t: f64, grid: &Grid) -> Result<Point> {
    let (start, end) = match (traj.times.first(), traj.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidInput("empty trajectory".into())),
    };
    let slack = super::range_slack(start, end);
    if t < start - slack || t > end + slack {
        return Err(Error::OutOfRange { time: t, start, end });
    }
    let t = t.clamp(start, end);
    let n = traj.len();
    if n == 1 {
        return Ok(traj.positions[0]);
    }
    let k = traj.times.partition_point(|&s| s <= t).clamp(1, n - 1) - 1;
    let width = 4.min(n);
    let first = k.saturating_sub(1).min(n - width);
    let base = traj.positions[first];
    let mut out = [0.0; 2];
    for j in first..first + width {
        let mut w = 1.0;
        for m in first..first + width {
            if m != j {
                w *= (t - traj.times[m]) / (traj.times[j] - traj.times[m]);
            }
        }
        for a in 0..grid.dim() {
            let x = base[a] + grid.min_image(traj.positions[j][a] - base[a]);
            out[a] += w * x;
        }
    }
    Ok(out)
}

/// m·(x(t + Δt) - x(t))/Δt with a minimal-image displacement.
pub fn indirect_momentum(traj: &Trajectory, t: f64, dt_meas: f64, grid: &Grid) -> Result<[f64; 2]> {
    if !(dt_meas > 0.0) {
        return Err(Error::InvalidInput(format!("measurement interval must be positive, got {dt_meas}")));
    }
    let x1 = position_at(traj, t, grid)?;
    let x2 = position_at(traj, t + dt_meas, grid)?;
    let m = grid.mass();
    let mut p = [0.0; 2];
    for a in 0..grid.dim() {
        p[a] = m * grid.min_image(x2[a] - x1[a]) / dt_meas;
    }
    Ok(p)
}

/// Search region for the crest: points within `half_width` (per axis,
/// minimal image) of `center`.
#[derive(Debug, Clone, Copy)]
pub struct CrestWindow {
    pub center: Point,
    pub half_width: f64,
}

/// Sub-cell offset of a maximum from three samples: parabola through
/// ln f (exact for Gaussians), plain parabola if a sample is not positive.
fn vertex_offset(fm: f64, f0: f64, fp: f64) -> f64 {
    let (a, b, c) = if fm > 0.0 && f0 > 0.0 && fp > 0.0 {
        (fm.ln(), f0.ln(), fp.ln())
    } else {
        (fm, f0, fp)
    };
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// Density maximum per frame with sub-grid refinement; the window follows
/// the crest. A maximum on the window edge is a lost crest.
pub fn crest_track(frames: &[(f64, ScalarField)], window: CrestWindow) -> Result<Trajectory> {
    let mut center = window.center;
    let mut traj = Trajectory {
        times: Vec::with_capacity(frames.len()),
        positions: Vec::with_capacity(frames.len()),
        aborted: None,
    };
    for (frame, (t, rho)) in frames.iter().enumerate() {
        if let Some(&last) = traj.times.last() {
            if !(*t > last) {
                return Err(Error::InvalidInput("frame times must increase".into()));
            }
        }
        let grid = *rho.grid();
        let h = grid.spacing();
        let dim = grid.dim();
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, &v) in rho.values().iter().enumerate() {
            let p = grid.point(i);
            let dist = (0..dim)
                .map(|a| grid.min_image(p[a] - center[a]).abs())
                .fold(0.0, f64::max);
            if dist <= window.half_width && best.is_none_or(|b| v > b.1) {
                best = Some((i, v, dist));
            }
        }
        let Some((i, _, dist)) = best else {
            return Err(Error::LostCrest { frame, time: *t });
        };
        if dist > window.half_width - h {
            return Err(Error::LostCrest { frame, time: *t });
        }
        let ij = grid.unflatten(i);
        let n = grid.n() as isize;
        let mut crest = grid.point(i);
        for a in 0..dim {
            let at = |off: isize| {
                let mut q = ij;
                q[a] = ((ij[a] as isize + off).rem_euclid(n)) as usize;
                rho.values()[grid.flatten(q)]
            };
            crest[a] += vertex_offset(at(-1), at(0), at(1)) * h;
        }
        crest = grid.wrap_point(crest);
        center = crest;
        traj.times.push(*t);
        traj.positions.push(crest);
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub t: f64,
    pub mean: Vec<f64>,
    pub width: Vec<f64>,
    /// L1 distance to the matching density frame, if one was supplied.
    pub l1: Option<f64>,
}

/// Sample mean and width of the surviving members at every recorded
/// time, plus the histogram distance to `densities` at matching times.
pub fn ensemble_summary(
    ensemble: &TrajectoryEnsemble,
    densities: &[(f64, ScalarField)],
    bins: usize,
) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::with_capacity(ensemble.times.len());
    for (k, &t) in ensemble.times.iter().enumerate() {
        let pts = ensemble.positions_at(k);
        if pts.is_empty() {
            continue;
        }
        let dim = densities.first().map(|d| d.1.grid().dim()).unwrap_or(2);
        let n = pts.len() as f64;
        let mut mean = vec![0.0; dim];
        let mut width = vec![0.0; dim];
        for a in 0..dim {
            mean[a] = pts.iter().map(|p| p[a]).sum::<f64>() / n;
            width[a] = (pts.iter().map(|p| (p[a] - mean[a]).powi(2)).sum::<f64>() / n).sqrt();
        }
        let tol = 1e-9 * t.abs().max(1.0);
        let l1 = match densities.iter().find(|(s, _)| (s - t).abs() <= tol) {
            Some((_, rho)) => Some(histogram_l1(&pts, rho, bins, None)?),
            None => None,
        };
        rows.push(SummaryRow { t, mean, width, l1 });
    }
    Ok(rows)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

/// `traj_id,t,x[,y],aborted`, one row per recorded sample.
pub fn write_trajectories_csv(path: impl AsRef<Path>, trajectories: &[Trajectory], dim: usize) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let header = if dim == 1 { "traj_id,t,x,aborted" } else { "traj_id,t,x,y,aborted" };
    writeln!(w, "{header}").map_err(io)?;
    for (id, tr) in trajectories.iter().enumerate() {
        let flag = u8::from(tr.aborted.is_some());
        for (t, p) in tr.times.iter().zip(&tr.positions) {
            if dim == 1 {
                writeln!(w, "{id},{t},{:e},{flag}", p[0]).map_err(io)?;
            } else {
                writeln!(w, "{id},{t},{:e},{:e},{flag}", p[0], p[1]).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// `t,mean_x..,width_x..,L1_to_rho` (L1 left empty when unknown).
pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let dim = rows.first().map(|r| r.mean.len()).unwrap_or(1);
    let axes = ["x", "y"];
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|a| format!("mean_{}", axes[a])));
    header.extend((0..dim).map(|a| format!("width_{}", axes[a])));
    header.push("L1_to_rho".into());
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for r in rows {
        let mut cols = vec![format!("{}", r.t)];
        cols.extend(r.mean.iter().map(|v| format!("{v:e}")));
        cols.extend(r.width.iter().map(|v| format!("{v:e}")));
        cols.push(r.l1.map(|v| format!("{v:e}")).unwrap_or_default());
        writeln!(w, "{}", cols.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}
