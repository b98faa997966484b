//! `nsch` command line: argument parsing, dispatch and exit codes.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 solver failure,
//! 3 configuration, usage or I/O error.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nsch_core::config::{parse_config, RunConfig};

mod convergence;
mod invariants;
mod run;

pub use invariants::{invariants as invariants_table, InvariantRow, InvariantTable};
pub use run::{config_hash, RunOutcome, REVISION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nsch", version, about = "Bulk-surface Navier-Stokes-Cahn-Hilliard solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration and write diagnostics, snapshots and a manifest.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a configuration without running it.
    Check { config: PathBuf },
    /// Run a configuration and check the discrete conservation and
    /// dissipation laws; exits 1 when any is violated.
    Invariants { config: PathBuf },
    /// Spatial and temporal refinement studies from a configuration.
    Convergence { config: PathBuf },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Solver(String),
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Io(_) => EXIT_CONFIG,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Violation(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

/// Classifies core errors: bad parameters are configuration errors,
/// everything else happened while solving.
pub(crate) fn from_core(e: nsch_core::Error) -> Failure {
    match e {
        nsch_core::Error::Parameter(_) | nsch_core::Error::Sizing(_) => Failure::Config(e.to_string()),
        other => Failure::Solver(other.to_string()),
    }
}

pub(crate) struct Loaded {
    pub config: RunConfig,
    pub bytes: Vec<u8>,
}

pub(crate) fn load(path: &Path) -> Result<Loaded, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Failure::Config(format!("{}: not UTF-8: {e}", path.display())))?;
    let config = parse_config(text).map_err(|e| Failure::Config(format!("{}:\n{e}", path.display())))?;
    // surface problems that only show up when building the run
    config.grid().map_err(from_core)?;
    config.variant_config().map_err(from_core)?;
    config.initial_state().map_err(from_core)?;
    Ok(Loaded { config, bytes })
}

fn check(path: &Path) -> Result<(), Failure> {
    let Loaded { config, .. } = load(path)?;
    let steps = nsch_core::coupled::step_count(config.time.t_end, config.time.dt);
    println!(
        "ok: {} x {} grid, variant {}, initial condition {}, {steps} steps of dt = {}",
        config.grid.nx,
        config.grid.ny,
        config.variant.name(),
        config.ic_kind.name(),
        config.time.dt
    );
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Reports go to standard output, problems to standard error.
pub fn cli_main<I, T>(args: I) -> i32
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
    let result = match cli.command {
        Command::Run { config, out } => run::run(&config, out.as_deref()).map(|o| {
            println!(
                "ran {} steps to t = {}; {} files in {}",
                o.steps,
                o.final_time,
                o.files.len(),
                o.dir.display()
            );
        }),
        Command::Check { config } => check(&config),
        Command::Invariants { config } => invariants::invariants(&config).and_then(|table| {
            print!("{table}");
            match table.failures().as_slice() {
                [] => Ok(()),
                names => Err(Failure::Violation(names.join(", "))),
            }
        }),
        Command::Convergence { config } => convergence::convergence(&config),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("nsch: {f}");
            f.exit_code()
        }
    }
}
