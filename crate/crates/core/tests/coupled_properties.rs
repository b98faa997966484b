use nsch_core::coupled::{initial_conditions, IcKind, IcParams, Stepper};
use nsch_core::diagnostics::{masses, total_energy};
use nsch_core::{Coupling, Grid, PhysParams, Potentials, Variant, VariantConfig};

fn droplet_run(n: usize, steps: usize, l: Coupling) -> (Vec<f64>, Vec<f64>) {
    let g = Grid::new(n, n, 1.0, 1.0).unwrap();
    let p = PhysParams {
        gamma_tau: 1.0,
        rho2: 2.0,
        nu2: 0.5,
        l,
        ..PhysParams::default()
    };
    let pots = Potentials::default();
    let cfg = VariantConfig::new(Variant::FullBulkSurface, p.clone(), pots, 1e-4).unwrap();
    let mut state = initial_conditions(IcKind::DropletOnWall, &g, &p, &IcParams::default()).unwrap();
    let mut stepper = Stepper::new(&g, &cfg, &state).unwrap();
    let mut energy = vec![total_energy(&g, &state, &p, &pots).total()];
    let mut mass = vec![masses(&g, &state.ch, &p).bulk];
    for _ in 0..steps {
        state = stepper.step(&state).unwrap().0;
        energy.push(total_energy(&g, &state, &p, &pots).total());
        mass.push(masses(&g, &state.ch, &p).bulk);
    }
    (energy, mass)
}

#[test]
fn coupled_energy_decays_on_a_droplet() {
    let (energy, _) = droplet_run(64, 500, Coupling::from_value(1.0).unwrap());
    let slack = 1e-8 * energy[0].abs();
    let rise = energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    assert!(rise <= slack, "energy rose by {rise:e} (slack {slack:e})");
    assert!(energy[500] < energy[0]);
}

// bulk transport is in flux form and the walls are impermeable
#[test]
fn bulk_mass_is_conserved_under_flow_without_transfer() {
    let (_, mass) = droplet_run(32, 100, Coupling::Infinite);
    for m in &mass {
        assert!((m - mass[0]).abs() <= 1e-12, "{m} vs {}", mass[0]);
    }
}
