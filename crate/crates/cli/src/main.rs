//! `bohrlab`: runs one library pipeline per invocation and writes a
//! deterministic JSON (or CSV) report.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use bohrlab_core::bogolyubov::PARSEVAL_TOL;
use bohrlab_core::bohr::{BOUNDARY_COLLAR, MEMBERSHIP_SLACK};
use bohrlab_core::homs::DEFAULT_HOM_TOL;
use bohrlab_core::linalg::{DEFAULT_COMMUTE_TOL, DEFAULT_UNITARY_TOL};
use bohrlab_core::reps::REPRESENTATION_TOL;
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Config, Flags, Format};

#[derive(Debug, Parser)]
#[command(
    name = "bohrlab",
    version,
    about = "Approximate homomorphisms, Bohr sets and Bogolyubov checks on finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Maximal defect of a map and a pair attaining it
    Defect,
    /// Average-then-polar correction of an approximate homomorphism
    Correct,
    /// Round a homomorphism to the nearest points of a net
    Discretize,
    /// Bohr set of a homomorphism and its basic properties
    Bohr,
    /// Cover the group by translates of a Bohr set, one per net point
    Cover,
    /// Compare genericity and density against (c/δ)^{n²}
    BoundCheck,
    /// Conjugate into the diagonal torus, restricting to a subgroup if needed
    #[command(name = "u-to-t")]
    #[serde(rename = "u-to-t")]
    UToT,
    /// Bohr set below γ_r as a normal subgroup
    Collapse,
    /// Search for a Bohr set inside (AA⁻¹)²
    Bogolyubov,
    /// Covering upgrade checks for U ⊆ V, W
    Upgrade,
    /// Product-set checks against the least nontrivial irrep dimension
    Quasirandom,
    /// Bounded-exponent subgroup version of the Bogolyubov search
    Boundedexp,
    /// Finite subgroups as ε-nets of a torus or SU(2)
    TuringProbe,
    /// Finite stages of the compactification of Z/p
    CyclicDemo,
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Library(bohrlab_core::Error),
    Io(String),
}

impl CliError {
    fn io(e: impl std::fmt::Display) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<bohrlab_core::Error> for CliError {
    fn from(e: bohrlab_core::Error) -> Self {
        CliError::Library(e)
    }
}

#[derive(Serialize)]
struct Tolerances {
    hom_tol: f64,
    unitary_tol: f64,
    commute_tol: f64,
    representation_tol: f64,
    membership_slack: f64,
    boundary_collar: f64,
    parseval_tol: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    command: Command,
    version: &'static str,
    seed: Option<u64>,
    tolerances: Tolerances,
    input: &'a Config,
    result: serde_json::Value,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BOHRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Schema(format!("BOHRLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::io)
}

fn render(command: Command, cfg: &Config, outcome: commands::Outcome) -> Result<Vec<u8>, CliError> {
    match cfg.format.unwrap_or_default() {
        Format::Json => {
            let report = Report {
                command,
                version: env!("CARGO_PKG_VERSION"),
                seed: cfg.seed,
                tolerances: Tolerances {
                    hom_tol: cfg.hom_tol.unwrap_or(DEFAULT_HOM_TOL),
                    unitary_tol: DEFAULT_UNITARY_TOL,
                    commute_tol: DEFAULT_COMMUTE_TOL,
                    representation_tol: REPRESENTATION_TOL,
                    membership_slack: MEMBERSHIP_SLACK,
                    boundary_collar: BOUNDARY_COLLAR,
                    parseval_tol: PARSEVAL_TOL,
                },
                input: cfg,
                result: outcome.result,
            };
            let mut bytes = serde_json::to_vec_pretty(&report).map_err(CliError::io)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let table = outcome
                .table
                .ok_or_else(|| CliError::Schema("CSV output is only available for sweep commands".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(CliError::io)?;
            for row in &table.rows {
                w.write_record(row).map_err(CliError::io)?;
            }
            w.into_inner().map_err(CliError::io)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let base = match &cli.flags.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let cfg = base.merge(&cli.flags)?;
    let started = Instant::now();
    let outcome = commands::run(cli.command, &cfg)?;
    let bytes = render(cli.command, &cfg, outcome)?;
    match &cli.flags.out {
        Some(path) => std::fs::write(path, &bytes).map_err(CliError::io)?,
        None => std::io::stdout().write_all(&bytes).map_err(CliError::io)?,
    }
    eprintln!("bohrlab: finished in {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Schema(msg)) => {
            eprintln!("error: schema: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Library(e)) => {
            eprintln!("error: {}\n  {e}", e.name());
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: io: {msg}");
            ExitCode::from(1)
        }
    }
}
