//! Scenario configuration: built-in defaults, then an optional TOML file,
//! then `--section.key value` overrides. Later layers win.

use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::fields::io::read_scalar_raw;
use crate::fields::{gaussian_amplitude, plane_wave_action, Grid, Point, PolarPair, Potential};
use crate::fields::{PotentialKind, ScalarField};

use super::scenarios::{defaults_for, SCENARIOS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Linear,
    Classical,
    Both,
}

impl SolverChoice {
    pub fn linear(self) -> bool {
        matches!(self, Self::Linear | Self::Both)
    }

    pub fn classical(self) -> bool {
        matches!(self, Self::Classical | Self::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    Harmonic { omega: f64 },
    Linear { force: Point },
    Coulomb { k: f64, softening: f64 },
    Sampled { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub center: Point,
    pub width: f64,
    pub momentum: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Gaussian(Packet),
    Superposition(Vec<Packet>),
    /// R uniform on the angle grid, S = Lφ.
    Angular { l: f64 },
}

/// Time step: a fixed value, or chosen from the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub state: StateSpec,
    pub solver: SolverChoice,
    pub dt: StepSize,
    pub t_end: f64,
    pub frames: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Scenario-specific parameters (`[scenario]` section).
    pub extra: Table,
}

/// Parses `value` as a TOML value, or keeps it as a string.
fn parse_value(value: &str) -> Value {
    match format!("v = {value}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(value.to_string())),
        Err(_) => Value::String(value.to_string()),
    }
}

fn merge(base: &mut Table, layer: Table) {
    for (k, v) in layer {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(l)) => merge(b, l),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::Config(format!("bad key `{key}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(Error::Config(format!("`{p}` in `{key}` is not a section"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Typed reads from one section, with the dotted name in error messages.
struct Section<'a> {
    name: &'a str,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn of(root: &'a Table, name: &'a str) -> Result<Self> {
        static EMPTY: std::sync::OnceLock<Table> = std::sync::OnceLock::new();
        let table = match root.get(name) {
            Some(Value::Table(t)) => t,
            Some(_) => return Err(Error::Config(format!("`{name}` must be a section"))),
            None => EMPTY.get_or_init(Table::new),
        };
        Ok(Self { name, table })
    }

    fn err(&self, key: &str, what: &str) -> Error {
        Error::Config(format!("{}.{key} {what}", self.name))
    }

    fn num_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => value_f64(v).map(Some).ok_or_else(|| self.err(key, "must be a number")),
        }
    }

    fn num(&self, key: &str) -> Result<f64> {
        self.num_opt(key)?.ok_or_else(|| self.err(key, "is required"))
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.num(key)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, &format!("must be positive and finite, got {v}")))
        }
    }

    fn count(&self, key: &str) -> Result<usize> {
        match self.table.get(key) {
            Some(Value::Integer(i)) if *i > 0 => Ok(*i as usize),
            Some(_) => Err(self.err(key, "must be a positive integer")),
            None => Err(self.err(key, "is required")),
        }
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        match self.table.get(key) {
            Some(Value::String(s)) => Ok(s),
            Some(_) => Err(self.err(key, "must be a string")),
            None => Err(self.err(key, "is required")),
        }
    }

    fn point(&self, key: &str) -> Result<Point> {
        point_of(self.table.get(key)).ok_or_else(|| self.err(key, "must be a number or an array of up to 2 finite numbers"))
    }
}

fn value_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn point_of(v: Option<&Value>) -> Option<Point> {
    let mut p = [0.0; 2];
    match v? {
        Value::Array(items) if items.len() <= 2 => {
            for (a, item) in items.iter().enumerate() {
                p[a] = value_f64(item)?;
            }
        }
        other => p[0] = value_f64(other)?,
    }
    p.iter().all(|x| x.is_finite()).then_some(p)
}

fn packet_of(section: &Section) -> Result<Packet> {
    Ok(Packet {
        center: section.point("center")?,
        width: section.positive("width")?,
        momentum: section.point("momentum")?,
        weight: section.num_opt("weight")?.unwrap_or(1.0),
    })
}

impl ScenarioConfig {
    /// Defaults for `scenario`, then `file`, then `overrides` (`section.key`, value).
    pub fn load(scenario: &str, file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = defaults_for(scenario).ok_or_else(|| {
            let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
            Error::Config(format!("unknown scenario `{scenario}`; valid: {}", names.join(", ")))
        })?;
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let layer = text
                .parse::<Table>()
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
            merge(&mut table, layer);
        }
        for (k, v) in overrides {
            set_path(&mut table, k, parse_value(v))?;
        }
        Self::from_table(scenario, &table)
    }

    pub fn from_table(scenario: &str, table: &Table) -> Result<Self> {
        let g = Section::of(table, "grid")?;
        let dim = g.count("dim")?;
        let grid = Grid::new(dim, g.count("n")?, g.positive("extent")?)
            .and_then(|gr| gr.with_units(g.positive("hbar")?, g.positive("mass")?))
            .map_err(|e| Error::Config(e.to_string()))?;

        let p = Section::of(table, "potential")?;
        let potential = match p.string("kind")? {
            "none" => PotentialSpec::None,
            "harmonic" => PotentialSpec::Harmonic { omega: p.positive("omega")? },
            "linear" => PotentialSpec::Linear { force: p.point("force")? },
            "coulomb" => PotentialSpec::Coulomb {
                k: p.positive("k")?,
                softening: p.positive("softening")?,
            },
            "sampled" => PotentialSpec::Sampled {
                file: PathBuf::from(p.string("file")?),
            },
            other => return Err(p.err("kind", &format!("`{other}` is not one of none, harmonic, linear, coulomb, sampled"))),
        };

        let s = Section::of(table, "state")?;
        let state = match s.string("kind")? {
            "gaussian" => StateSpec::Gaussian(packet_of(&s)?),
            "superposition" => {
                let items = match s.table.get("packets") {
                    Some(Value::Array(items)) if !items.is_empty() => items,
                    _ => return Err(s.err("packets", "must be a non-empty array of tables")),
                };
                let packets = items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| match item {
                        Value::Table(t) => {
                            let name = format!("state.packets[{i}]");
                            packet_of(&Section { name: &name, table: t })
                        }
                        _ => Err(s.err("packets", "must contain tables")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                StateSpec::Superposition(packets)
            }
            "angular" => StateSpec::Angular { l: s.num("l")? },
            other => return Err(s.err("kind", &format!("`{other}` is not one of gaussian, superposition, angular"))),
        };

        let sv = Section::of(table, "solver")?;
        let solver = match sv.string("kind")? {
            "linear" => SolverChoice::Linear,
            "classical" => SolverChoice::Classical,
            "both" => SolverChoice::Both,
            other => return Err(sv.err("kind", &format!("`{other}` is not one of linear, classical, both"))),
        };
        let dt = match sv.table.get("dt") {
            Some(Value::String(a)) if a == "auto" => StepSize::Auto,
            Some(_) => StepSize::Fixed(sv.positive("dt")?),
            None => StepSize::Auto,
        };
        let t_end = sv.positive("t_end")?;
        let frames = sv.count("frames")?;

        let e = Section::of(table, "ensemble")?;
        let ensemble_size = e.count("size")?;
        let seed = match e.table.get("seed") {
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            _ => return Err(e.err("seed", "must be a non-negative integer")),
        };

        let o = Section::of(table, "output")?;
        let output_dir = PathBuf::from(o.string("dir")?);

        let extra = match table.get("scenario") {
            Some(Value::Table(t)) => t.clone(),
            Some(_) => return Err(Error::Config("`scenario` must be a section".into())),
            None => Table::new(),
        };
        Ok(Self {
            scenario: scenario.to_string(),
            grid,
            potential,
            state,
            solver,
            dt,
            t_end,
            frames,
            ensemble_size,
            seed,
            output_dir,
            extra,
        })
    }

    pub fn build_potential(&self) -> Result<Potential> {
        let kind = match &self.potential {
            PotentialSpec::None => PotentialKind::Zero,
            PotentialSpec::Harmonic { omega } => PotentialKind::Harmonic {
                omega: *omega,
                center: [0.0; 2],
            },
            PotentialSpec::Linear { force } => PotentialKind::Linear { force: *force },
            PotentialSpec::Coulomb { k, softening } => PotentialKind::Coulomb {
                k: *k,
                softening: *softening,
            },
            PotentialSpec::Sampled { file } => {
                let v = read_scalar_raw(file)?;
                if *v.grid() != self.grid {
                    return Err(Error::Config(format!("{} is sampled on a different grid", file.display())));
                }
                PotentialKind::Sampled(v.into_values())
            }
        };
        Potential::new(self.grid, kind)
    }

    /// Polar form of one packet: Gaussian R with unit norm and S = p·x.
    pub fn packet_state(&self, p: &Packet) -> Result<PolarPair> {
        PolarPair::new(
            gaussian_amplitude(self.grid, p.center, p.width)?,
            plane_wave_action(self.grid, p.momentum),
        )
    }

    /// Packets making up the initial state (one for a plain Gaussian).
    pub fn packets(&self) -> Result<Vec<Packet>> {
        match &self.state {
            StateSpec::Gaussian(p) => Ok(vec![p.clone()]),
            StateSpec::Superposition(ps) => Ok(ps.clone()),
            StateSpec::Angular { .. } => Err(Error::Config("this scenario needs gaussian packets".into())),
        }
    }

    /// Uniform R on the angle grid with S = Lφ.
    pub fn angular_state(&self, l: f64) -> Result<PolarPair> {
        let r = ScalarField::constant(self.grid, (1.0 / self.grid.extent()).sqrt());
        let s = ScalarField::from_fn(self.grid, |p| l * p[0])?;
        PolarPair::new(r, s)
    }

    pub fn extra_f64(&self, key: &str) -> Result<f64> {
        match self.extra.get(key).and_then(value_f64) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Config(format!("scenario.{key} must be a finite number"))),
        }
    }

    pub fn extra_usize(&self, key: &str) -> Result<usize> {
        match self.extra.get(key) {
            Some(Value::Integer(i)) if *i > 0 => Ok(*i as usize),
            _ => Err(Error::Config(format!("scenario.{key} must be a positive integer"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_values_are_typed() {
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("0.5"), Value::Float(0.5));
        assert_eq!(parse_value("[1.0, 2]"), Value::Array(vec![Value::Float(1.0), Value::Integer(2)]));
        assert_eq!(parse_value("linear"), Value::String("linear".into()));
    }

    #[test]
    fn layers_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        fs::write(&file, "[grid]\nn = 512\n[solver]\nt_end = 0.25\n").unwrap();
        let over = vec![("grid.n".to_string(), "256".to_string())];
        let cfg = ScenarioConfig::load("free-dispersion", Some(&file), &over).unwrap();
        assert_eq!(cfg.grid.n(), 256);
        assert_eq!(cfg.t_end, 0.25);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let bad = |k: &str, v: &str| {
            let over = vec![(k.to_string(), v.to_string())];
            matches!(ScenarioConfig::load("free-dispersion", None, &over), Err(Error::Config(_)))
        };
        assert!(bad("grid.extent", "-1"));
        assert!(bad("solver.kind", "quantum"));
        assert!(bad("solver.dt", "0"));
        assert!(bad("state.width", "nan"));
        assert!(matches!(ScenarioConfig::load("nope", None, &[]), Err(Error::Config(_))));
    }
}
