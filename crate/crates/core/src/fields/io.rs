//! Field snapshots: CSV with a grid header, and raw little-endian f64
//! dumps with a text sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::field::{ComplexField, ScalarField};
use super::grid::Grid;
use crate::error::{Error, Result};

fn grid_header(grid: &Grid) -> String {
    format!(
        "# grid: dim,n,extent,hbar,mass\n# {},{},{},{},{}\n",
        grid.dim(),
        grid.n(),
        grid.extent(),
        grid.hbar(),
        grid.mass()
    )
}

fn write_rows(path: &Path, grid: &Grid, columns: usize, value: impl Fn(usize, &mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(grid_header(grid).as_bytes()).map_err(io)?;
    let _ = columns;
    for idx in 0..grid.len() {
        let ij = grid.unflatten(idx);
        if grid.dim() == 1 {
            write!(w, "{}", ij[0]).map_err(io)?;
        } else {
            write!(w, "{},{}", ij[0], ij[1]).map_err(io)?;
        }
        value(idx, &mut w).map_err(io)?;
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Rows `i[,j],value` in row-major order.
pub fn write_scalar_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let v = field.values();
    write_rows(path.as_ref(), field.grid(), 1, |i, w| write!(w, ",{:e}", v[i]))
}

/// Rows `i[,j],re,im` in row-major order.
pub fn write_complex_csv(field: &ComplexField, path: impl AsRef<Path>) -> Result<()> {
    let v = field.values();
    write_rows(path.as_ref(), field.grid(), 2, |i, w| write!(w, ",{:e},{:e}", v[i].re, v[i].im))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

/// Writes the samples as little-endian f64 to `path` and a descriptor to
/// `path.txt`.
pub fn write_scalar_raw(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let grid = field.grid();
    let mut bytes = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let desc = format!(
        "format = f64-le\nlayout = row-major\ncomponents = 1\ndim = {}\nn = {}\nextent = {}\nhbar = {}\nmass = {}\n",
        grid.dim(),
        grid.n(),
        grid.extent(),
        grid.hbar(),
        grid.mass()
    );
    let side = sidecar(path);
    fs::write(&side, desc).map_err(|e| Error::io(side, e))
}

/// Reads a dump written by [`write_scalar_raw`].
pub fn read_scalar_raw(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let side = sidecar(path);
    let desc = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let get = |key: &str| -> Result<String> {
        desc.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim().to_string())
            .ok_or_else(|| Error::InvalidInput(format!("descriptor missing `{key}`")))
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("descriptor `{key}`: {e}")))
    };
    if get("format")? != "f64-le" {
        return Err(Error::InvalidInput("unsupported raw format".into()));
    }
    let grid = Grid::new(num("dim")? as usize, num("n")? as usize, num("extent")?)?
        .with_units(num("hbar")?, num("mass")?)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::InvalidInput(format!(
            "raw dump has {} bytes, expected {}",
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ScalarField::new(grid, values)
}
