//! `invariants`: run a configuration and check the discrete laws.
//!
//! The configured run is checked for incompressibility. The mass and energy
//! laws hold exactly only without convection, so they are checked on a
//! replay of the same configuration with the flow switched off.

use std::fmt;
use std::path::Path;

use nsch_core::coupled::{step_count, Stepper};
use nsch_core::diagnostics::{incompressibility_residuals, masses, total_energy};
use nsch_core::{Coupling, Variant};

use crate::{from_core, load, Failure, Loaded};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRow {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
}

impl InvariantRow {
    pub fn passed(&self) -> bool {
        self.measured <= self.bound
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantTable {
    pub rows: Vec<InvariantRow>,
}

impl InvariantTable {
    pub fn failures(&self) -> Vec<&'static str> {
        self.rows.iter().filter(|r| !r.passed()).map(|r| r.name).collect()
    }
}

impl fmt::Display for InvariantTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>12} {:>12}  result", "invariant", "measured", "bound")?;
        for r in &self.rows {
            let verdict = if r.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{:<22} {:>12.3e} {:>12.3e}  {verdict}", r.name, r.measured, r.bound)?;
        }
        Ok(())
    }
}

pub fn invariants(config_path: &Path) -> Result<InvariantTable, Failure> {
    let Loaded { config, .. } = load(config_path)?;
    let grid = config.grid().map_err(from_core)?;
    let vc = config.variant_config().map_err(from_core)?;
    let initial = config.initial_state().map_err(from_core)?;
    let steps = step_count(config.time.t_end, config.time.dt);
    let mut table = InvariantTable::default();

    if vc.variant != Variant::NonconvectiveCh {
        let mut stepper = Stepper::new(&grid, &vc, &initial).map_err(from_core)?;
        let mut state = initial.clone();
        let mut div = 0.0_f64;
        for _ in 0..steps {
            state = stepper.step(&state).map_err(from_core)?.0;
            div = div.max(incompressibility_residuals(&grid, &state.flow).0);
        }
        table.rows.push(InvariantRow {
            name: "incompressibility",
            measured: div,
            bound: 10.0 * vc.ns.projection_tol,
        });
    }

    let mut replay = vc.clone();
    replay.variant = Variant::NonconvectiveCh;
    let p = &replay.params;
    let mut stepper = Stepper::new(&grid, &replay, &initial).map_err(from_core)?;
    let mut state = initial;
    let m0 = masses(&grid, &state.ch, p);
    let e0 = total_energy(&grid, &state, p, &replay.pots).total();
    // largest one-step energy change; negative when the energy decays
    let (mut prev, mut rise) = (e0, if steps == 0 { 0.0 } else { f64::NEG_INFINITY });
    let (mut combined, mut bulk, mut surf) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..steps {
        state = stepper.step(&state).map_err(from_core)?.0;
        let e = total_energy(&grid, &state, p, &replay.pots).total();
        rise = rise.max(e - prev);
        prev = e;
        let m = masses(&grid, &state.ch, p);
        combined = combined.max((m.combined - m0.combined).abs());
        bulk = bulk.max((m.bulk - m0.bulk).abs());
        surf = surf.max((m.surf_total() - m0.surf_total()).abs());
    }
    table.rows.push(InvariantRow {
        name: "energy_dissipation",
        measured: rise,
        bound: 1e-10 * e0.abs(),
    });
    table.rows.push(InvariantRow {
        name: "combined_mass",
        measured: combined,
        bound: 1e-11 * (grid.volume() + grid.boundary_length()),
    });
    if p.l == Coupling::Infinite {
        table.rows.push(InvariantRow {
            name: "bulk_mass",
            measured: bulk / grid.volume(),
            bound: 1e-11,
        });
        table.rows.push(InvariantRow {
            name: "surface_mass",
            measured: surf / grid.boundary_length(),
            bound: 1e-11,
        });
    }
    Ok(table)
}
