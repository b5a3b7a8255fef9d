//! Files written by a scenario run: `summary.csv`, `log.csv` and
//! `snapshots/`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fields::io::write_scalar_csv;
use crate::fields::ScalarField;
use crate::observe::ObservationLog;

/// Output directory of one run.
pub struct RunOutput {
    pub dir: PathBuf,
    pub scenario: String,
    pub seed: u64,
}

impl RunOutput {
    pub fn create(dir: &Path, scenario: &str, seed: u64) -> Result<Self> {
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps).map_err(|e| Error::io(&snaps, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            scenario: scenario.to_string(),
            seed,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn banner(&self) -> String {
        format!("# scenario={} seed={}\n", self.scenario, self.seed)
    }

    /// Writes `body` (CSV rows, header first) behind the run banner.
    pub fn write_csv(&self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.banner().as_bytes())
            .and_then(|_| w.write_all(body.as_bytes()))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&path, e))
    }

    /// `snapshots/<label>_<index>.csv`.
    pub fn snapshot(&self, label: &str, index: usize, field: &ScalarField) -> Result<()> {
        write_scalar_csv(field, self.dir.join("snapshots").join(format!("{label}_{index:04}.csv")))
    }

    pub fn snapshots(&self, label: &str, frames: &[(f64, ScalarField)]) -> Result<()> {
        frames.iter().enumerate().try_for_each(|(k, (_, f))| self.snapshot(label, k, f))
    }

    /// Moments of every solver's run in one file, `solver` as the first column.
    pub fn write_log(&self, logs: &[(&str, &ObservationLog)]) -> Result<()> {
        let dim = logs
            .iter()
            .find_map(|(_, l)| l.rows.first().map(|r| r.mean.len()))
            .unwrap_or(1);
        let axes = ["x", "y"];
        let mut body = String::from("solver,t,norm");
        for a in axes.iter().take(dim) {
            body.push_str(&format!(",mean_{a}"));
        }
        for a in axes.iter().take(dim) {
            body.push_str(&format!(",width_{a}"));
        }
        body.push('\n');
        for (name, log) in logs {
            for row in &log.rows {
                body.push_str(&format!("{name},{},{:e}", row.t, row.norm));
                for v in row.mean.iter().chain(&row.width) {
                    body.push_str(&format!(",{v:e}"));
                }
                body.push('\n');
            }
            for ev in &log.events {
                body.push_str(&format!("# {name}: {ev}\n"));
            }
        }
        self.write_csv("log.csv", &body)
    }
}

/// Headline metrics of a run, written as `metric,value` rows.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    pub rows: Vec<(String, String)>,
}

impl Summary {
    pub fn num(&mut self, name: impl Into<String>, v: f64) {
        self.rows.push((name.into(), format!("{v:e}")));
    }

    pub fn flag(&mut self, name: impl Into<String>, v: bool) {
        self.rows.push((name.into(), v.to_string()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, name: &str) -> Option<f64> {
        self.get(name)?.parse().ok()
    }

    pub fn write(&self, out: &RunOutput) -> Result<()> {
        let mut body = String::from("metric,value\n");
        for (k, v) in &self.rows {
            body.push_str(&format!("{k},{v}\n"));
        }
        out.write_csv("summary.csv", &body)
    }
}
