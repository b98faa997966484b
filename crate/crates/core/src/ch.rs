//! Linearly stabilized implicit step of the convective bulk-surface
//! Cahn-Hilliard system.
//!
//! Bulk and wall unknowns `(phi, mu, psi, theta)` are solved together in one
//! sparse system. Wall coupling uses a half-cell flux between the wall-adjacent
//! cell centre and the wall; eliminating the wall trace through the coupling
//! relation gives
//!
//! ```text
//! d_n phi       = a_K (alpha psi - phi_0),   a_K = 1 / (hy/2 + K eps)
//! m d_n mu      = b_L (beta theta - mu_0),   b_L = m / (hy/2 + m L)
//! ```
//!
//! with the usual limits (`K = 0`: trace constraint, `K = inf`: no flux; same
//! for `L`). The same wall flux leaves the bulk cell and enters the surface
//! equation, so `beta * bulk mass + surface mass` telescopes exactly.
//!
//! Transport is explicit upwind: conservative `div(phi u)` in the bulk,
//! advective `u_tau . grad_G psi` on the walls.

use crate::error::{Error, Result};
use crate::grid::{CellField, FaceField, Grid, Wall, WallPair};
use crate::linalg::{BandedLu, SparseMatrix, TripletBuilder};
use crate::model::{Coupling, PhysParams};
use crate::potentials::PotentialSpec;

/// Bulk and surface phase fields and chemical potentials at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ChUnknowns {
    pub phi: CellField,
    pub mu: CellField,
    pub psi: WallPair<Vec<f64>>,
    pub theta: WallPair<Vec<f64>>,
}

impl ChUnknowns {
    pub fn uniform(grid: &Grid, phi: f64, psi: f64) -> Self {
        Self {
            phi: CellField::constant(grid, phi),
            mu: CellField::zeros(grid),
            psi: WallPair::new(vec![psi; grid.nx], vec![psi; grid.nx]),
            theta: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.data.iter().chain(&self.mu.data).all(|v| v.is_finite())
            && self
                .psi
                .iter()
                .chain(self.theta.iter())
                .all(|(_, w)| w.iter().all(|v| v.is_finite()))
    }

    /// `(max(|phi|, |psi|) - 1)_+`
    pub fn band_violation(&self) -> f64 {
        let m = self
            .phi
            .max_abs()
            .max(crate::grid::max_abs(&self.psi.bottom))
            .max(crate::grid::max_abs(&self.psi.top));
        (m - 1.0).max(0.0)
    }
}

/// The bulk and surface potentials `F` and `G`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Potentials {
    pub bulk: PotentialSpec,
    pub surface: PotentialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Robin,
    Neumann,
}

impl From<Coupling> for BoundaryKind {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Zero => BoundaryKind::Dirichlet,
            Coupling::Finite(_) => BoundaryKind::Robin,
            Coupling::Infinite => BoundaryKind::Neumann,
        }
    }
}

/// Which branch of the `K` and `L` coupling conditions applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingCase {
    pub k: BoundaryKind,
    pub l: BoundaryKind,
}

impl CouplingCase {
    pub fn from_params(params: &PhysParams) -> Self {
        Self {
            k: params.k.into(),
            l: params.l.into(),
        }
    }
}

/// Half-cell wall transfer coefficients, see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallCoefficients {
    /// `d_n phi = a_k (alpha psi - phi_0)`
    pub a_k: f64,
    /// `m d_n mu = b_l (beta theta - mu_0)`
    pub b_l: f64,
}

impl WallCoefficients {
    pub fn new(grid: &Grid, params: &PhysParams) -> Self {
        let half = 0.5 * grid.hy;
        let a_k = match params.k {
            Coupling::Zero => 1.0 / half,
            Coupling::Finite(k) => 1.0 / (half + k * params.eps),
            Coupling::Infinite => 0.0,
        };
        let m = params.mob_bulk;
        let b_l = if m == 0.0 {
            0.0
        } else {
            match params.l {
                Coupling::Zero => m / half,
                Coupling::Finite(l) => m / (half + m * l),
                Coupling::Infinite => 0.0,
            }
        };
        Self { a_k, b_l }
    }
}

/// `m_Omega d_n mu` on each wall (outward), as used by the step.
pub fn wall_mass_flux(grid: &Grid, params: &PhysParams, ch: &ChUnknowns) -> WallPair<Vec<f64>> {
    let c = WallCoefficients::new(grid, params);
    WallPair::from_fn(|wall| {
        let row = ch.mu.wall_row(wall);
        ch.theta[wall]
            .iter()
            .zip(row)
            .map(|(th, mu0)| c.b_l * (params.beta * th - mu0))
            .collect()
    })
}

/// `d_n phi` on each wall (outward), as used by the step.
pub fn wall_phi_normal_derivative(
    grid: &Grid,
    params: &PhysParams,
    ch: &ChUnknowns,
) -> WallPair<Vec<f64>> {
    let c = WallCoefficients::new(grid, params);
    WallPair::from_fn(|wall| {
        let row = ch.phi.wall_row(wall);
        ch.psi[wall]
            .iter()
            .zip(row)
            .map(|(ps, phi0)| c.a_k * (params.alpha * ps - phi0))
            .collect()
    })
}

/// Knobs that are not part of the physical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChOptions {
    /// Multiplies the bulk-to-surface flux as seen by the surface equation.
    /// Anything but 1 breaks mass conservation; exists for fault-injection
    /// tests of the invariant checker.
    pub surface_flux_scale: f64,
}

impl Default for ChOptions {
    fn default() -> Self {
        Self {
            surface_flux_scale: 1.0,
        }
    }
}

/// Velocity seen by the phase fields: MAC face velocity plus the tangential
/// slip velocity on each wall (at wall faces `x = i hx`).
#[derive(Debug, Clone, Copy)]
pub struct Transport<'a> {
    pub u: &'a FaceField,
    pub wall: &'a WallPair<Vec<f64>>,
}

/// Unknown numbering: bottom wall `(psi, theta)` pairs, then cells `(phi, mu)`
/// row by row, then top wall pairs. Keeps the bandwidth near `2 nx`.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    nx: usize,
    ny: usize,
}

impl Layout {
    pub fn new(grid: &Grid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
        }
    }

    pub fn size(&self) -> usize {
        2 * self.nx * self.ny + 4 * self.nx
    }

    #[inline]
    pub fn phi(&self, i: usize, j: usize) -> usize {
        2 * self.nx + 2 * (j * self.nx + i)
    }

    #[inline]
    pub fn mu(&self, i: usize, j: usize) -> usize {
        self.phi(i, j) + 1
    }

    #[inline]
    pub fn psi(&self, wall: Wall, i: usize) -> usize {
        match wall {
            Wall::Bottom => 2 * i,
            Wall::Top => 2 * self.nx + 2 * self.nx * self.ny + 2 * i,
        }
    }

    #[inline]
    pub fn theta(&self, wall: Wall, i: usize) -> usize {
        self.psi(wall, i) + 1
    }

    pub fn is_bulk(&self, index: usize) -> bool {
        index >= 2 * self.nx && index < 2 * self.nx + 2 * self.nx * self.ny
    }
}

fn check_inputs(grid: &Grid, state: &ChUnknowns, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    let n = grid.nx * grid.ny;
    let shapes_ok = state.phi.data.len() == n
        && state.mu.data.len() == n
        && state.psi.iter().chain(state.theta.iter()).all(|(_, w)| w.len() == grid.nx);
    if !shapes_ok {
        return Err(Error::Shape("Cahn-Hilliard unknowns do not match the grid".into()));
    }
    Ok(())
}

/// Assembles the matrix of one step. It depends on the grid, the parameters
/// and `dt` only, never on the state (all state dependence sits in the
/// right-hand side), so it can be factored once and reused.
pub fn assemble_ch_matrix(
    grid: &Grid,
    params: &PhysParams,
    pots: &Potentials,
    dt: f64,
    opts: &ChOptions,
) -> SparseMatrix {
    let lay = Layout::new(grid);
    let (nx, ny) = (grid.nx, grid.ny);
    let case = CouplingCase::from_params(params);
    let coef = WallCoefficients::new(grid, params);
    let (hx2, hy2) = (grid.hx * grid.hx, grid.hy * grid.hy);
    let (m, eps) = (params.mob_bulk, params.eps);
    let s_f = pots.bulk.stabilization_constant();
    let s_g = pots.surface.stabilization_constant();
    let mut b = TripletBuilder::with_capacity(lay.size(), 14 * lay.size());

    for j in 0..ny {
        for i in 0..nx {
            let (rp, rm) = (lay.phi(i, j), lay.mu(i, j));
            b.add(rp, rp, 1.0 / dt);
            b.add(rm, rm, 1.0);
            b.add(rm, rp, -s_f / eps);
            // five-point Laplacian, no flux through walls
            let mut neighbours = [(grid.ip(i), j, hx2), (grid.im(i), j, hx2), (0, 0, 0.0), (0, 0, 0.0)];
            let mut count = 2;
            if j + 1 < ny {
                neighbours[count] = (i, j + 1, hy2);
                count += 1;
            }
            if j > 0 {
                neighbours[count] = (i, j - 1, hy2);
                count += 1;
            }
            for &(ni, nj, h2) in &neighbours[..count] {
                // phi row: -m lap(mu)
                b.add(rp, lay.mu(ni, nj), -m / h2);
                b.add(rp, rm, m / h2);
                // mu row: +eps lap(phi)
                b.add(rm, lay.phi(ni, nj), eps / h2);
                b.add(rm, rp, -eps / h2);
            }
        }
    }

    let (alpha, beta) = (params.alpha, params.beta);
    let (delta, mg) = (params.delta, params.mob_surf);
    let scale = opts.surface_flux_scale;
    for wall in Wall::BOTH {
        let j = grid.wall_row(wall);
        for i in 0..nx {
            let (rs, rt) = (lay.psi(wall, i), lay.theta(wall, i));
            let (rp, rm) = (lay.phi(i, j), lay.mu(i, j));
            let (ip, im) = (grid.ip(i), grid.im(i));
            // psi row: psi/dt - m_G lap_G theta + beta W
            b.add(rs, rs, 1.0 / dt);
            b.add(rs, rt, 2.0 * mg / hx2);
            b.add(rs, lay.theta(wall, ip), -mg / hx2);
            b.add(rs, lay.theta(wall, im), -mg / hx2);
            // theta row: theta + delta lap_G psi - S_G/delta psi - alpha eps d_n phi
            b.add(rt, rt, 1.0);
            b.add(rt, rs, -2.0 * delta / hx2 - s_g / delta);
            b.add(rt, lay.psi(wall, ip), delta / hx2);
            b.add(rt, lay.psi(wall, im), delta / hx2);

            if case.k != crate::ch::BoundaryKind::Neumann {
                let c = eps * coef.a_k;
                // mu row: + eps a_K (alpha psi - phi_0) / hy
                b.add(rm, rs, c * alpha / grid.hy);
                b.add(rm, rp, -c / grid.hy);
                // theta row: - alpha eps a_K (alpha psi - phi_0)
                b.add(rt, rs, -c * alpha * alpha);
                b.add(rt, rp, c * alpha);
            }
            if case.l != crate::ch::BoundaryKind::Neumann {
                let w = coef.b_l;
                // phi row: - W / hy, W = b_L (beta theta - mu_0)
                b.add(rp, rt, -w * beta / grid.hy);
                b.add(rp, rm, w / grid.hy);
                // psi row: + beta W
                b.add(rs, rt, scale * beta * w * beta);
                b.add(rs, rm, -scale * beta * w);
            }
        }
    }
    b.build()
}

/// Upwind conservative transport `div(c u)` of a cell field.
pub fn bulk_transport(grid: &Grid, c: &CellField, u: &FaceField) -> CellField {
    let (nx, ny) = (grid.nx, grid.ny);
    let upwind = |vel: f64, behind: f64, ahead: f64| if vel > 0.0 { vel * behind } else { vel * ahead };
    let mut fx = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            fx[j * nx + i] = upwind(u.x_at(i, j), c.at(grid.im(i), j), c.at(i, j));
        }
    }
    let mut fy = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            fy[j * nx + i] = upwind(u.y_at(i, j), c.at(i, j - 1), c.at(i, j));
        }
    }
    let mut out = CellField::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            out.data[j * nx + i] = (fx[j * nx + grid.ip(i)] - fx[j * nx + i]) / grid.hx
                + (fy[(j + 1) * nx + i] - fy[j * nx + i]) / grid.hy;
        }
    }
    out
}

/// Upwind advective transport `u_tau . grad_G w` along a wall. The
/// material-derivative form keeps constant surface fields constant even when
/// the slip velocity has nonzero surface divergence.
pub fn surface_transport(grid: &Grid, w: &[f64], u_tau: &[f64]) -> Vec<f64> {
    (0..grid.nx)
        .map(|i| {
            let v = 0.5 * (u_tau[i] + u_tau[grid.ip(i)]);
            if v > 0.0 {
                v * (w[i] - w[grid.im(i)]) / grid.hx
            } else {
                v * (w[grid.ip(i)] - w[i]) / grid.hx
            }
        })
        .collect()
}

pub fn assemble_ch_rhs(
    grid: &Grid,
    state: &ChUnknowns,
    transport: Option<Transport<'_>>,
    params: &PhysParams,
    pots: &Potentials,
    dt: f64,
) -> Vec<f64> {
    let lay = Layout::new(grid);
    let (nx, ny) = (grid.nx, grid.ny);
    let eps = params.eps;
    let s_f = pots.bulk.stabilization_constant();
    let s_g = pots.surface.stabilization_constant();
    let mut rhs = vec![0.0; lay.size()];
    let conv = transport.map(|t| bulk_transport(grid, &state.phi, t.u));
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let phi = state.phi.data[k];
            let mut r = phi / dt;
            if let Some(c) = &conv {
                r -= c.data[k];
            }
            rhs[lay.phi(i, j)] = r;
            rhs[lay.mu(i, j)] = (pots.bulk.derivative_unchecked(phi) - s_f * phi) / eps;
        }
    }
    for wall in Wall::BOTH {
        let psi = &state.psi[wall];
        let sconv = transport.map(|t| surface_transport(grid, psi, &t.wall[wall]));
        for i in 0..nx {
            let mut r = psi[i] / dt;
            if let Some(c) = &sconv {
                r -= c[i];
            }
            rhs[lay.psi(wall, i)] = r;
            rhs[lay.theta(wall, i)] =
                (pots.surface.derivative_unchecked(psi[i]) - s_g * psi[i]) / params.delta;
        }
    }
    rhs
}

/// Matrix and right-hand side of one step.
pub fn assemble_ch_system(
    grid: &Grid,
    state: &ChUnknowns,
    transport: Option<Transport<'_>>,
    params: &PhysParams,
    pots: &Potentials,
    dt: f64,
) -> Result<(SparseMatrix, Vec<f64>)> {
    check_inputs(grid, state, dt)?;
    Ok((
        assemble_ch_matrix(grid, params, pots, dt, &ChOptions::default()),
        assemble_ch_rhs(grid, state, transport, params, pots, dt),
    ))
}

pub fn unpack(grid: &Grid, x: &[f64]) -> ChUnknowns {
    let lay = Layout::new(grid);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut phi = CellField::zeros(grid);
    let mut mu = CellField::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            phi.data[j * nx + i] = x[lay.phi(i, j)];
            mu.data[j * nx + i] = x[lay.mu(i, j)];
        }
    }
    let psi = WallPair::from_fn(|w| (0..nx).map(|i| x[lay.psi(w, i)]).collect());
    let theta = WallPair::from_fn(|w| (0..nx).map(|i| x[lay.theta(w, i)]).collect());
    ChUnknowns { phi, mu, psi, theta }
}

/// Reusable stepper: keeps the factorization while grid, parameters and `dt`
/// are unchanged (the matrix does not depend on the state).
#[derive(Debug, Clone)]
pub struct ChStepper {
    grid: Grid,
    params: PhysParams,
    pots: Potentials,
    opts: ChOptions,
    cache: Option<(f64, BandedLu)>,
}

impl ChStepper {
    pub fn new(grid: &Grid, params: &PhysParams, pots: &Potentials, opts: ChOptions) -> Result<Self> {
        params.validate()?;
        pots.bulk.validate()?;
        pots.surface.validate()?;
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            pots: *pots,
            opts,
            cache: None,
        })
    }

    pub fn step(
        &mut self,
        state: &ChUnknowns,
        transport: Option<Transport<'_>>,
        dt: f64,
    ) -> Result<ChUnknowns> {
        check_inputs(&self.grid, state, dt)?;
        if self.cache.as_ref().map_or(true, |(d, _)| *d != dt) {
            let a = assemble_ch_matrix(&self.grid, &self.params, &self.pots, dt, &self.opts);
            let lu = BandedLu::factor(&a).map_err(|source| Error::Solver {
                stage: "Cahn-Hilliard factorization",
                source,
            })?;
            self.cache = Some((dt, lu));
        }
        let rhs = assemble_ch_rhs(&self.grid, state, transport, &self.params, &self.pots, dt);
        let (_, lu) = self.cache.as_ref().expect("factorization cached above");
        let x = lu.solve(&rhs);
        let next = unpack(&self.grid, &x);
        if !next.is_finite() {
            return Err(Error::NonFinite("Cahn-Hilliard solution".into()));
        }
        Ok(next)
    }
}

/// One step of the bulk-surface Cahn-Hilliard system with velocity `transport`
/// (`None` for the non-convective system).
pub fn ch_step(
    grid: &Grid,
    state: &ChUnknowns,
    transport: Option<Transport<'_>>,
    params: &PhysParams,
    pots: &Potentials,
    dt: f64,
) -> Result<ChUnknowns> {
    ChStepper::new(grid, params, pots, ChOptions::default())?.step(state, transport, dt)
}
