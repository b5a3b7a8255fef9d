//! Command-line front end: `sim run <scenario>`, `sim list`, `sim version`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Errors
//! are reported on stderr as one line of `key=value` fields.

mod config;
mod output;
mod runs;
mod scenarios;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use config::{Packet, PotentialSpec, ScenarioConfig, SolverChoice, StateSpec, StepSize};
pub use output::{RunOutput, Summary};
pub use scenarios::{defaults_for, run_scenario, Schedule, ScenarioInfo, SCENARIOS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sim", about = "Linear and classical Schrödinger scenarios", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write log.csv, summary.csv and snapshots/.
    Run {
        scenario: String,
        /// TOML file layered over the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads for ensemble propagation and transport.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides as `--section.key value` pairs.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// List the registered scenarios.
    List,
    /// Print the version.
    Version,
}

/// Exit code for an error: configuration problems are 2, the rest 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) => "config",
        Error::Caustic(_) => "caustic",
        Error::NormDrift { .. } => "norm_drift",
        Error::ClampBudget { .. } => "clamp_budget",
        Error::Io { .. } => "io",
        _ => "runtime",
    }
}

/// One line: `error kind=<kind> exit=<code> message="<text>"`.
pub fn error_line(e: &Error) -> String {
    format!(
        "error kind={} exit={} message=\"{}\"",
        error_kind(e),
        exit_code(e),
        e.to_string().replace('"', "'")
    )
}

/// Pairs `--section.key value` tokens.
fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>, Error> {
    let mut out = Vec::new();
    let mut it = tokens.iter();
    while let Some(key) = it.next() {
        let name = key
            .strip_prefix("--")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| Error::Config(format!("expected `--key value`, got `{key}`")))?;
        let value = it.next().ok_or_else(|| Error::Config(format!("missing value for `{key}`")))?;
        out.push((name.to_string(), value.clone()));
    }
    Ok(out)
}

pub fn list_scenarios() -> String {
    let width = SCENARIOS.iter().map(|s| s.name.len()).max().unwrap_or(0);
    SCENARIOS
        .iter()
        .map(|s| format!("{:width$}  {}\n", s.name, s.description))
        .collect()
}

fn run_command(scenario: &str, config: Option<PathBuf>, threads: Option<usize>, overrides: &[String]) -> Result<Summary, Error> {
    let overrides = parse_overrides(overrides)?;
    let cfg = ScenarioConfig::load(scenario, config.as_deref(), &overrides)?;
    match threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run_scenario(&cfg)),
        None => run_scenario(&cfg),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", list_scenarios());
            EXIT_OK
        }
        Command::Version => {
            println!("sim {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
        Command::Run {
            scenario,
            config,
            threads,
            overrides,
        } => match run_command(&scenario, config, threads, &overrides) {
            Ok(summary) => {
                for (k, v) in &summary.rows {
                    println!("{k},{v}");
                }
                EXIT_OK
            }
            Err(e) => {
                eprintln!("{}", error_line(&e));
                exit_code(&e)
            }
        },
    }
}
