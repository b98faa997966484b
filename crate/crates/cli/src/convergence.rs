//! `convergence`: observed orders in space and time.
//!
//! Space: the phase-field equations without flow on the configured grid and
//! its two successive refinements, `t_end` at the configured `dt`.
//! Time: the configured variant on the configured grid with `dt`, `dt/2`
//! and `dt/4`.

use std::path::Path;

use nsch_core::coupled::{initial_conditions, step_count};
use nsch_core::studies::{spatial_study, temporal_study, OrderStudy};
use nsch_core::{Grid, Variant};

use crate::{from_core, load, Failure, Loaded};

fn print_study(label: &str, levels: &[String], s: &OrderStudy) {
    println!("{label}");
    for (k, e) in s.errors.iter().enumerate() {
        let order = k.checked_sub(1).and_then(|i| s.orders.get(i));
        match order {
            Some(o) => println!("  {} vs {}: difference {e:.4e}, order {o:.3}", levels[k], levels[k + 1]),
            None => println!("  {} vs {}: difference {e:.4e}", levels[k], levels[k + 1]),
        }
    }
}

pub fn convergence(config_path: &Path) -> Result<(), Failure> {
    let Loaded { config, .. } = load(config_path)?;
    let vc = config.variant_config().map_err(from_core)?;
    let steps = step_count(config.time.t_end, config.time.dt);
    if steps == 0 {
        return Err(Failure::Config("convergence needs t_end > 0".into()));
    }
    let g = &config.grid;
    let grids: Vec<Grid> = (0..3)
        .map(|k| Grid::new(g.nx << k, g.ny << k, g.lx, g.ly))
        .collect::<Result<_, _>>()
        .map_err(from_core)?;

    let mut space_cfg = vc.clone();
    space_cfg.variant = Variant::NonconvectiveCh;
    let ic = |grid: &Grid| initial_conditions(config.ic_kind, grid, &config.params, &config.ic);
    let space = spatial_study(&grids, &space_cfg, ic, steps).map_err(from_core)?;
    let names: Vec<String> = grids.iter().map(|g| format!("{}x{}", g.nx, g.ny)).collect();
    print_study("spatial (phi, L2, no flow)", &names, &space);

    let initial = config.initial_state().map_err(from_core)?;
    let time = temporal_study(&grids[0], &vc, &initial, steps as f64 * vc.dt, 3).map_err(from_core)?;
    let names: Vec<String> = (0..3).map(|k| format!("dt/{}", 1 << k)).collect();
    print_study(&format!("temporal (phi, L2, {})", vc.variant.name()), &names, &time);
    Ok(())
}
