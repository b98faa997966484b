//! Lie splitting of the full system (Cahn-Hilliard first, then flow),
//! model variants, initial conditions and the time loop.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ch::{ChOptions, ChStepper, ChUnknowns, Potentials, Transport};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{CellField, Grid, WallPair};
use crate::model::{Coupling, PhysParams};
use crate::ns::{ns_step_with, FlowUnknowns, NsOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub time: f64,
    pub flow: FlowUnknowns,
    pub ch: ChUnknowns,
}

impl State {
    pub fn at_rest(grid: &Grid, ch: ChUnknowns) -> Self {
        Self {
            time: 0.0,
            flow: FlowUnknowns::zeros(grid),
            ch,
        }
    }

    /// Name of the first field holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        let bad = |v: &[f64]| v.iter().any(|x| !x.is_finite());
        let walls = |w: &WallPair<Vec<f64>>| bad(&w.bottom) || bad(&w.top);
        if bad(&self.ch.phi.data) {
            Some("phi")
        } else if bad(&self.ch.mu.data) {
            Some("mu")
        } else if walls(&self.ch.psi) {
            Some("psi")
        } else if walls(&self.ch.theta) {
            Some("theta")
        } else if bad(&self.flow.u.x) || bad(&self.flow.u.y) || walls(&self.flow.u_wall) {
            Some("u")
        } else if bad(&self.flow.p.data) {
            Some("p")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Bulk-surface phase fields, dynamic boundary conditions and slip.
    FullBulkSurface,
    /// Neumann conditions on `phi` and `mu`; the surface phase field is held
    /// at its initial value.
    NeumannAgg,
    /// Phase fields only, no flow.
    NonconvectiveCh,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::FullBulkSurface, Variant::NeumannAgg, Variant::NonconvectiveCh];

    pub fn name(self) -> &'static str {
        match self {
            Variant::FullBulkSurface => "full_bulk_surface",
            Variant::NeumannAgg => "neumann_agg",
            Variant::NonconvectiveCh => "nonconvective_ch",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantConfig {
    pub variant: Variant,
    pub params: PhysParams,
    pub pots: Potentials,
    pub dt: f64,
    pub ch: ChOptions,
    pub ns: NsOptions,
}

impl VariantConfig {
    /// Validates and applies the variant's restrictions (Neumann coupling for
    /// [`Variant::NeumannAgg`]).
    pub fn new(variant: Variant, params: PhysParams, pots: Potentials, dt: f64) -> Result<Self> {
        let mut params = params;
        let mut ns = NsOptions::default();
        if variant == Variant::NeumannAgg {
            params.k = Coupling::Infinite;
            params.l = Coupling::Infinite;
            ns.surface_forcing = false;
        }
        params.validate()?;
        pots.bulk.validate()?;
        pots.surface.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive and finite, got {dt}")));
        }
        Ok(Self {
            variant,
            params,
            pots,
            dt,
            ch: ChOptions::default(),
            ns,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    /// `max|u| dt / min(hx, hy)` before the step; zero without flow.
    pub cfl: f64,
    pub predictor_iterations: usize,
    pub projection_iterations: usize,
}

/// Stateful stepper reusing the Cahn-Hilliard factorization across steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    config: VariantConfig,
    ch: ChStepper,
    frozen: Option<(WallPair<Vec<f64>>, WallPair<Vec<f64>>)>,
    steps: usize,
}

impl Stepper {
    pub fn new(grid: &Grid, config: &VariantConfig, initial: &State) -> Result<Self> {
        let ch = ChStepper::new(grid, &config.params, &config.pots, config.ch)?;
        let frozen = (config.variant == Variant::NeumannAgg)
            .then(|| (initial.ch.psi.clone(), initial.ch.theta.clone()));
        Ok(Self {
            grid: grid.clone(),
            config: config.clone(),
            ch,
            frozen,
            steps: 0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &VariantConfig {
        &self.config
    }

    pub fn step(&mut self, state: &State) -> Result<(State, StepReport)> {
        let index = self.steps + 1;
        let dt = self.config.dt;
        let transport = match self.config.variant {
            Variant::NonconvectiveCh => None,
            _ => Some(Transport {
                u: &state.flow.u,
                wall: &state.flow.u_wall,
            }),
        };
        let mut ch = self
            .ch
            .step(&state.ch, transport, dt)
            .map_err(|e| e.at_step(index, "cahn-hilliard"))?;
        if let Some((psi, theta)) = &self.frozen {
            ch.psi = psi.clone();
            ch.theta = theta.clone();
        }
        let mut report = StepReport::default();
        let flow = match self.config.variant {
            Variant::NonconvectiveCh => state.flow.clone(),
            _ => {
                let (flow, r) = ns_step_with(&self.grid, &state.flow, &ch, &self.config.params, dt, &self.config.ns)
                    .map_err(|e| e.at_step(index, "navier-stokes"))?;
                report = StepReport {
                    cfl: r.cfl,
                    predictor_iterations: r.predictor.iterations,
                    projection_iterations: r.projection.iterations,
                };
                flow
            }
        };
        let next = State {
            time: state.time + dt,
            flow,
            ch,
        };
        if let Some(field) = next.first_non_finite() {
            return Err(Error::Blowup { step: index, field });
        }
        self.steps = index;
        Ok((next, report))
    }
}

/// One full step from scratch (no factorization reuse).
pub fn step(grid: &Grid, state: &State, config: &VariantConfig) -> Result<State> {
    Stepper::new(grid, config, state)?.step(state).map(|(s, _)| s)
}

/// Number of fixed steps needed to reach `t_end`, tolerant of rounding in
/// `t_end / dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let r = t_end / dt;
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        r.ceil() as usize
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub steps: usize,
    pub observer_calls: usize,
    pub cfl_warnings: usize,
    pub max_cfl: f64,
    pub initial: DiagnosticsRecord,
    pub last: DiagnosticsRecord,
}

/// Integrates `ceil(t_end / dt)` steps. `observer(n, state, record)` is called
/// after every step `n` divisible by `cadence`; the initial record is part of
/// the summary.
pub fn run(
    grid: &Grid,
    config: &VariantConfig,
    initial: State,
    t_end: f64,
    cadence: usize,
    mut observer: impl FnMut(usize, &State, &DiagnosticsRecord),
) -> Result<RunSummary> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!("t_end must be nonnegative and finite, got {t_end}")));
    }
    if cadence == 0 {
        return Err(Error::Parameter("diagnostic cadence must be at least 1".into()));
    }
    if let Some(field) = initial.first_non_finite() {
        return Err(Error::Blowup { step: 0, field });
    }
    let n = step_count(t_end, config.dt);
    let record = |s: &State| diagnostics::record(grid, s, &config.params, &config.pots);
    let first = record(&initial);
    let mut stepper = Stepper::new(grid, config, &initial)?;
    let mut state = initial;
    let mut summary = RunSummary {
        final_state: state.clone(),
        steps: 0,
        observer_calls: 0,
        cfl_warnings: 0,
        max_cfl: 0.0,
        initial: first,
        last: first,
    };
    for k in 1..=n {
        let (next, report) = stepper.step(&state)?;
        state = next;
        if report.cfl > 1.0 {
            summary.cfl_warnings += 1;
        }
        summary.max_cfl = summary.max_cfl.max(report.cfl);
        if k % cadence == 0 {
            let r = record(&state);
            observer(k, &state, &r);
            summary.observer_calls += 1;
            summary.last = r;
        }
    }
    if n % cadence != 0 {
        summary.last = record(&state);
    }
    summary.steps = n;
    summary.final_state = state;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    DropletOnWall,
    Stratified,
    RandomSmooth,
}

impl IcKind {
    pub const ALL: [IcKind; 3] = [IcKind::DropletOnWall, IcKind::Stratified, IcKind::RandomSmooth];

    pub fn name(self) -> &'static str {
        match self {
            IcKind::DropletOnWall => "droplet_on_wall",
            IcKind::Stratified => "stratified",
            IcKind::RandomSmooth => "random_smooth",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Parameters of the initial conditions. Lengths are absolute; `None`
/// positions default to the domain centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcParams {
    /// Bulk mean for `random_smooth`.
    pub mean: f64,
    /// Surface mean for `random_smooth`; the bulk mean when unset.
    pub psi_mean: Option<f64>,
    pub seed: u64,
    pub amplitude: f64,
    /// Droplet radius.
    pub r0: f64,
    pub center_x: Option<f64>,
    pub interface_y: Option<f64>,
}

impl Default for IcParams {
    fn default() -> Self {
        Self {
            mean: 0.0,
            psi_mean: None,
            seed: 0,
            amplitude: 0.1,
            r0: 0.2,
            center_x: None,
            interface_y: None,
        }
    }
}

fn profile(signed_distance: f64, eps: f64) -> f64 {
    (signed_distance / (std::f64::consts::SQRT_2 * eps)).tanh()
}

fn surface_from_trace(trace: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        trace
    } else {
        (trace / alpha).clamp(-1.0, 1.0)
    }
}

/// Band-limited random field: a few Fourier modes compatible with the
/// boundary conditions, scaled to unit max amplitude.
fn smooth_noise_2d(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use std::f64::consts::PI;
    let modes: Vec<(f64, f64, f64, f64)> = (0..=4)
        .flat_map(|kx| (0..=4).map(move |ky| (kx as f64, ky as f64)))
        .filter(|&(kx, ky)| kx + ky > 0.0)
        .map(|(kx, ky)| (kx, ky, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let mut out = vec![0.0; grid.nx * grid.ny];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.xc(i), grid.yc(j));
            out[j * grid.nx + i] = modes
                .iter()
                .map(|&(kx, ky, a, ph)| a * (2.0 * PI * kx * x / grid.lx + ph).cos() * (PI * ky * y / grid.ly).cos())
                .sum();
        }
    }
    normalize(&mut out);
    out
}

fn smooth_noise_1d(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use std::f64::consts::PI;
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let mut out = grid.wall_from_fn(|x| {
        modes
            .iter()
            .map(|&(k, a, ph)| a * (2.0 * PI * k * x / grid.lx + ph).cos())
            .sum()
    });
    normalize(&mut out);
    out
}

fn normalize(v: &mut [f64]) {
    let m = crate::grid::max_abs(v);
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

fn set_mean(v: &mut [f64], target: f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x += target - mean);
}

/// Initial state at rest with `mu = theta = 0`.
pub fn initial_conditions(kind: IcKind, grid: &Grid, params: &PhysParams, ic: &IcParams) -> Result<State> {
    let eps = params.eps;
    let alpha = params.alpha;
    let ch = match kind {
        IcKind::DropletOnWall => {
            let r0 = ic.r0;
            let cx = ic.center_x.unwrap_or(0.5 * grid.lx);
            if !(r0 > 0.0) || r0 >= 0.5 * grid.lx || r0 >= grid.ly || !(0.0..=grid.lx).contains(&cx) {
                return Err(Error::Parameter(format!(
                    "droplet radius {r0} at x = {cx} does not fit a {} x {} domain",
                    grid.lx, grid.ly
                )));
            }
            let dist = |x: f64, y: f64| {
                let dx = (x - cx) - grid.lx * ((x - cx) / grid.lx).round();
                (dx * dx + y * y).sqrt()
            };
            let phi = CellField::from_fn(grid, |x, y| profile(r0 - dist(x, y), eps));
            let psi = WallPair::new(
                grid.wall_from_fn(|x| surface_from_trace(profile(r0 - dist(x, 0.0), eps), alpha)),
                grid.wall_from_fn(|x| surface_from_trace(profile(r0 - dist(x, grid.ly), eps), alpha)),
            );
            ChUnknowns {
                mu: CellField::zeros(grid),
                theta: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
                phi,
                psi,
            }
        }
        IcKind::Stratified => {
            let yi = ic.interface_y.unwrap_or(0.5 * grid.ly);
            if !(yi > 0.0 && yi < grid.ly) {
                return Err(Error::Parameter(format!("interface height {yi} outside (0, {})", grid.ly)));
            }
            let phi = CellField::from_fn(grid, |_, y| profile(yi - y, eps));
            let psi = WallPair::new(
                vec![surface_from_trace(profile(yi, eps), alpha); grid.nx],
                vec![surface_from_trace(profile(yi - grid.ly, eps), alpha); grid.nx],
            );
            ChUnknowns {
                mu: CellField::zeros(grid),
                theta: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
                phi,
                psi,
            }
        }
        IcKind::RandomSmooth => {
            if !(ic.amplitude >= 0.0 && ic.amplitude.is_finite()) {
                return Err(Error::Parameter(format!("amplitude must be nonnegative, got {}", ic.amplitude)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ic.seed);
            let mut phi: Vec<f64> = smooth_noise_2d(grid, &mut rng).iter().map(|v| ic.amplitude * v).collect();
            set_mean(&mut phi, ic.mean);
            let psi_mean = ic.psi_mean.unwrap_or(ic.mean);
            let psi = WallPair::from_fn(|_| {
                let mut w: Vec<f64> = smooth_noise_1d(grid, &mut rng).iter().map(|v| ic.amplitude * v).collect();
                set_mean(&mut w, psi_mean);
                w
            });
            ChUnknowns {
                phi: CellField {
                    nx: grid.nx,
                    ny: grid.ny,
                    data: phi,
                },
                mu: CellField::zeros(grid),
                psi,
                theta: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
            }
        }
    };
    Ok(State::at_rest(grid, ch))
}

/// `max |a - b|` over `phi`, `mu`, `u` and `p`.
pub fn max_difference(a: &State, b: &State) -> f64 {
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    d(&a.ch.phi.data, &b.ch.phi.data)
        .max(d(&a.ch.mu.data, &b.ch.mu.data))
        .max(d(&a.flow.u.x, &b.flow.u.x))
        .max(d(&a.flow.u.y, &b.flow.u.y))
        .max(d(&a.flow.p.data, &b.flow.p.data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(16, 16, 1.0, 1.0).unwrap()
    }

    #[test]
    fn nonconvective_step_is_a_ch_step() {
        let g = grid();
        let p = PhysParams { eps: 0.05, delta: 0.05, ..PhysParams::default() };
        let s = initial_conditions(IcKind::RandomSmooth, &g, &p, &IcParams::default()).unwrap();
        let cfg = VariantConfig::new(Variant::NonconvectiveCh, p.clone(), Potentials::default(), 1e-4).unwrap();
        let a = step(&g, &s, &cfg).unwrap();
        let b = crate::ch::ch_step(&g, &s.ch, None, &p, &Potentials::default(), 1e-4).unwrap();
        assert_eq!(a.ch, b);
        assert_eq!(a.flow, s.flow);
        assert!((a.time - 1e-4).abs() < 1e-20);
    }

    #[test]
    fn global_fixed_point() {
        let g = grid();
        let p = PhysParams::default();
        let s0 = State::at_rest(&g, ChUnknowns::uniform(&g, 1.0, 1.0));
        let cfg = VariantConfig::new(Variant::FullBulkSurface, p, Potentials::default(), 1e-3).unwrap();
        let mut st = Stepper::new(&g, &cfg, &s0).unwrap();
        let mut s = s0.clone();
        for _ in 0..100 {
            s = st.step(&s).unwrap().0;
        }
        assert!(max_difference(&s, &s0) < 1e-12);
    }

    #[test]
    fn run_counts() {
        let g = grid();
        let p = PhysParams { eps: 0.05, delta: 0.05, ..PhysParams::default() };
        let s = initial_conditions(IcKind::RandomSmooth, &g, &p, &IcParams::default()).unwrap();
        let cfg = VariantConfig::new(Variant::NonconvectiveCh, p, Potentials::default(), 1e-3).unwrap();
        let r = run(&g, &cfg, s.clone(), 0.0, 1, |_, _, _| panic!("no steps")).unwrap();
        assert_eq!((r.steps, r.observer_calls), (0, 0));
        assert_eq!(r.initial.time, 0.0);
        let mut seen = Vec::new();
        let r = run(&g, &cfg, s, 0.0105, 3, |k, _, _| seen.push(k)).unwrap();
        assert_eq!(r.steps, 11);
        assert_eq!(seen, vec![3, 6, 9]);
        assert_eq!(step_count(0.3, 0.1), 3);
    }

    #[test]
    fn ic_examples() {
        let g = Grid::new(64, 64, 1.0, 1.0).unwrap();
        let p = PhysParams::default();
        let strat = initial_conditions(IcKind::Stratified, &g, &p, &IcParams::default()).unwrap();
        assert!(g.integrate_cells(&strat.ch.phi).abs() < g.hy);

        let drop = initial_conditions(IcKind::DropletOnWall, &g, &p, &IcParams::default()).unwrap();
        let area = std::f64::consts::PI * 0.04 / 2.0;
        let expected = 2.0 * area - 1.0;
        let m = g.integrate_cells(&drop.ch.phi);
        assert!((m - expected).abs() < 0.02 * expected.abs(), "{m} vs {expected}");

        let ic = IcParams { mean: -0.3, seed: 7, ..IcParams::default() };
        let r = initial_conditions(IcKind::RandomSmooth, &g, &p, &ic).unwrap();
        assert!((g.integrate_cells(&r.ch.phi) / g.volume() + 0.3).abs() < 1e-12);
        let dev = r.ch.phi.data.iter().map(|v| (v + 0.3).abs()).fold(0.0, f64::max);
        assert!(dev <= 0.1 + 1e-12 && dev > 0.01);

        let big = IcParams { r0: 0.6, ..IcParams::default() };
        assert!(initial_conditions(IcKind::DropletOnWall, &g, &p, &big).is_err());
    }

    #[test]
    fn random_ic_is_reproducible() {
        let g = grid();
        let p = PhysParams::default();
        let ic = IcParams { seed: 42, ..IcParams::default() };
        let a = initial_conditions(IcKind::RandomSmooth, &g, &p, &ic).unwrap();
        let b = initial_conditions(IcKind::RandomSmooth, &g, &p, &ic).unwrap();
        assert_eq!(a, b);
        let c = initial_conditions(IcKind::RandomSmooth, &g, &p, &IcParams { seed: 43, ..ic }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn neumann_variant_forces_coupling() {
        let cfg = VariantConfig::new(Variant::NeumannAgg, PhysParams::default(), Potentials::default(), 1e-3).unwrap();
        assert_eq!(cfg.params.k, Coupling::Infinite);
        assert_eq!(cfg.params.l, Coupling::Infinite);
        assert!(VariantConfig::new(Variant::FullBulkSurface, PhysParams::default(), Potentials::default(), 0.0).is_err());
    }
}
