//! Shared setups for the solver benchmarks.

use nsch_core::coupled::{initial_conditions, IcKind, IcParams};
use nsch_core::{Grid, PhysParams, Potentials, State, Variant, VariantConfig};

/// A droplet on the bottom wall of an `n x n` unit box with unmatched
/// densities, the standard moving-contact-line setup.
pub fn droplet_case(n: usize, variant: Variant) -> (Grid, VariantConfig, State) {
    let grid = Grid::new(n, n, 1.0, 1.0).expect("benchmark grid");
    let params = PhysParams {
        rho2: 2.0,
        nu2: 0.5,
        eps: 0.04,
        delta: 0.04,
        ..PhysParams::default()
    };
    let state = initial_conditions(IcKind::DropletOnWall, &grid, &params, &IcParams::default()).expect("droplet");
    let config = VariantConfig::new(variant, params, Potentials::default(), 1e-4).expect("benchmark config");
    (grid, config, state)
}
