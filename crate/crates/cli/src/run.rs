//! `run`: integrate a configuration and write its artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nsch_core::coupled::{step_count, State, Stepper};
use nsch_core::diagnostics::record;
use nsch_core::io::{write_snapshot_set, TimeseriesWriter};
use sha2::{Digest, Sha256};

use crate::{from_core, load, Failure, Loaded};

/// Revision of the source tree the binary was built from.
pub const REVISION: &str = env!("NSCH_REVISION");

pub const TIMESERIES_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const RESOLVED_CONFIG_FILE: &str = "resolved.conf";

pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub steps: usize,
    pub final_time: f64,
    /// Every written file, relative to `dir`.
    pub files: Vec<String>,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn snapshots(&mut self, step: usize, state: &State) -> Result<(), Failure> {
        let paths = write_snapshot_set(&self.dir, step, state).map_err(io_err(&self.dir))?;
        self.files.extend(
            paths
                .iter()
                .filter_map(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned()),
        );
        Ok(())
    }

    fn manifest(&self, config_name: &str, hash: &str, steps: usize, status: &str) -> Result<(), Failure> {
        let path = self.dir.join(MANIFEST_FILE);
        let mut text = String::new();
        text.push_str(&format!("revision = {REVISION}\n"));
        text.push_str(&format!("config = {config_name}\n"));
        text.push_str(&format!("config_sha256 = {hash}\n"));
        text.push_str(&format!("steps = {steps}\n"));
        text.push_str(&format!("status = {status}\n"));
        text.push_str("[files]\n");
        for f in &self.files {
            text.push_str(f);
            text.push('\n');
        }
        let mut out = fs::File::create(&path).map_err(io_err(&path))?;
        out.write_all(text.as_bytes()).map_err(io_err(&path))
    }
}

pub fn run(config_path: &Path, out: Option<&Path>) -> Result<RunOutcome, Failure> {
    let Loaded { config, bytes } = load(config_path)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let hash = config_hash(&bytes);
    let config_name = config_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();

    let grid = config.grid().map_err(from_core)?;
    let vc = config.variant_config().map_err(from_core)?;
    let initial = config.initial_state().map_err(from_core)?;
    let steps = step_count(config.time.t_end, config.time.dt);
    let diag_every = config.time.diag_every;
    let snapshot_every = config.output.snapshot_every;

    let mut art = Artifacts { dir: dir.clone(), files: Vec::new() };
    let resolved = dir.join(RESOLVED_CONFIG_FILE);
    fs::write(&resolved, config.to_text()).map_err(io_err(&resolved))?;
    art.files.push(RESOLVED_CONFIG_FILE.into());

    let csv_path = dir.join(TIMESERIES_FILE);
    let mut csv = TimeseriesWriter::create(&csv_path).map_err(io_err(&csv_path))?;
    art.files.push(TIMESERIES_FILE.into());
    let diag = |s: &State| record(&grid, s, &vc.params, &vc.pots);
    csv.push(&diag(&initial)).map_err(io_err(&csv_path))?;
    art.snapshots(0, &initial)?;

    let mut stepper = Stepper::new(&grid, &vc, &initial).map_err(from_core)?;
    let mut state = initial;
    let mut cfl_warnings = 0usize;
    let mut solver_error = None;
    let mut done = 0usize;
    for k in 1..=steps {
        match stepper.step(&state) {
            Ok((next, report)) => {
                state = next;
                done = k;
                if report.cfl > 1.0 {
                    cfl_warnings += 1;
                }
            }
            Err(e) => {
                solver_error = Some(from_core(e));
                break;
            }
        }
        if k % diag_every == 0 {
            csv.push(&diag(&state)).map_err(io_err(&csv_path))?;
        }
        let last = k == steps;
        if (snapshot_every > 0 && k % snapshot_every == 0) || last {
            art.snapshots(k, &state)?;
        }
    }
    csv.finish().map_err(io_err(&csv_path))?;
    if cfl_warnings > 0 {
        eprintln!("nsch: warning: advective CFL number above 1 in {cfl_warnings} steps");
    }
    let status = if solver_error.is_some() { "failed" } else { "complete" };
    art.manifest(&config_name, &hash, done, status)?;
    if let Some(f) = solver_error {
        return Err(f);
    }
    Ok(RunOutcome {
        dir,
        steps,
        final_time: state.time,
        files: art.files,
    })
}
