//! One incremental-projection step of variable-density Navier-Stokes with
//! relative mass flux, capillary forcing and generalized Navier slip.
//!
//! The predictor is symmetric positive definite: inertia `rho u / dt` with the
//! density frozen at the post-Cahn-Hilliard phase field, plus the viscous form
//! `sum 2 nu |Du|^2` written as a sum of squared stencils. The slip condition
//! is eliminated into the wall-adjacent `u_x` rows: a half-cell shear balance
//! `2 nu (u_0 - u_w) / hy + gamma u_w = f` gives
//!
//! ```text
//! u_w = kappa (u_0 + f hy / (2 nu)),   kappa = 1 / (1 + gamma hy / (2 nu))
//! ```
//!
//! and the wall traction becomes `-gamma kappa u_0 + kappa f`.

use crate::ch::{wall_mass_flux, ChUnknowns};
use crate::error::{Error, Result};
use crate::grid::{CellField, FaceField, Grid, Wall, WallPair};
use crate::linalg::{solve_from, Method, SolveError, SolveStats, SparseMatrix, TripletBuilder};
use crate::model::PhysParams;

/// Velocity on MAC faces, pressure at cell centres and the tangential slip
/// velocity on each wall (at wall faces `x = i hx`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowUnknowns {
    pub u: FaceField,
    pub p: CellField,
    pub u_wall: WallPair<Vec<f64>>,
}

impl FlowUnknowns {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: FaceField::zeros(grid),
            p: CellField::zeros(grid),
            u_wall: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
        }
    }

    /// Sets `u` and derives the slip velocity for an unforced wall.
    pub fn from_velocity(grid: &Grid, params: &PhysParams, u: FaceField, phi: &CellField) -> Self {
        let mut flow = Self {
            u,
            p: CellField::zeros(grid),
            u_wall: WallPair::new(vec![0.0; grid.nx], vec![0.0; grid.nx]),
        };
        flow.u.zero_wall_normal();
        let zero = vec![0.0; grid.nx];
        for wall in Wall::BOTH {
            flow.u_wall[wall] = slip_velocity(grid, params, phi, &flow.u, wall, &zero);
        }
        flow
    }

    pub fn is_finite(&self) -> bool {
        self.u.x.iter().chain(&self.u.y).chain(&self.p.data).all(|v| v.is_finite())
            && self.u_wall.iter().all(|(_, w)| w.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsOptions {
    /// Bound on the 2-norm (hence the max-norm) of the discrete divergence
    /// after projection.
    pub projection_tol: f64,
    /// Relative residual for the momentum predictor.
    pub predictor_tol: f64,
    pub max_iter: usize,
    /// Whether `theta d_x psi` drives the slip condition.
    pub surface_forcing: bool,
}

impl Default for NsOptions {
    fn default() -> Self {
        Self {
            projection_tol: 1e-9,
            predictor_tol: 1e-12,
            max_iter: 20_000,
            surface_forcing: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsReport {
    /// `max|u| dt / min(hx, hy)` of the incoming velocity.
    pub cfl: f64,
    pub predictor: SolveStats,
    pub projection: SolveStats,
}

impl NsReport {
    pub fn cfl_warning(&self) -> bool {
        self.cfl > 1.0
    }
}

fn face_avg_x(grid: &Grid, c: &CellField, i: usize, j: usize) -> f64 {
    0.5 * (c.at(grid.im(i), j) + c.at(i, j))
}

fn face_avg_y(c: &CellField, i: usize, j: usize) -> f64 {
    0.5 * (c.at(i, j - 1) + c.at(i, j))
}

/// Viscosity at the bottom-left corner node `(i hx, j hy)`, `1 <= j < ny`.
fn node_avg(grid: &Grid, c: &CellField, i: usize, j: usize) -> f64 {
    let im = grid.im(i);
    0.25 * (c.at(im, j - 1) + c.at(i, j - 1) + c.at(im, j) + c.at(i, j))
}

/// `(c_w, kappa)` of the eliminated slip relation at wall face `i`.
fn slip_coefficients(grid: &Grid, params: &PhysParams, nu: f64) -> (f64, f64) {
    let kappa = 1.0 / (1.0 + params.gamma_tau * grid.hy / (2.0 * nu));
    (params.gamma_tau * kappa, kappa)
}

fn wall_viscosity(grid: &Grid, params: &PhysParams, phi: &CellField, wall: Wall, i: usize) -> f64 {
    let j = grid.wall_row(wall);
    0.5 * (params.viscosity_at(phi.at(grid.im(i), j)) + params.viscosity_at(phi.at(i, j)))
}

/// Slip velocity implied by the wall-adjacent `u_x` and tangential forcing `f`.
pub fn slip_velocity(
    grid: &Grid,
    params: &PhysParams,
    phi: &CellField,
    u: &FaceField,
    wall: Wall,
    forcing: &[f64],
) -> Vec<f64> {
    let j = grid.wall_row(wall);
    (0..grid.nx)
        .map(|i| {
            let nu = wall_viscosity(grid, params, phi, wall, i);
            let (_, kappa) = slip_coefficients(grid, params, nu);
            kappa * (u.x_at(i, j) + forcing[i] * grid.hy / (2.0 * nu))
        })
        .collect()
}

/// Tangential slip forcing `theta d_x psi + (J.n) u_w / 2` on wall faces.
pub fn slip_forcing(
    grid: &Grid,
    params: &PhysParams,
    ch: &ChUnknowns,
    u_wall: &WallPair<Vec<f64>>,
    surface_forcing: bool,
) -> WallPair<Vec<f64>> {
    let flux = wall_mass_flux(grid, params, ch);
    let jn_scale = -0.5 * (params.rho2 - params.rho1);
    WallPair::from_fn(|wall| {
        let (psi, theta, w) = (&ch.psi[wall], &ch.theta[wall], &flux[wall]);
        (0..grid.nx)
            .map(|i| {
                let im = grid.im(i);
                let jn = jn_scale * 0.5 * (w[im] + w[i]);
                let mut f = 0.5 * jn * u_wall[wall][i];
                if surface_forcing {
                    f += 0.5 * (theta[im] + theta[i]) * (psi[i] - psi[im]) / grid.hx;
                }
                f
            })
            .collect()
    })
}

/// Numbering of predictor unknowns: all `u_x`, then interior `u_y` rows.
struct VelocityLayout {
    nx: usize,
    ny: usize,
}

impl VelocityLayout {
    fn size(&self) -> usize {
        self.nx * self.ny + self.nx * (self.ny - 1)
    }

    fn ux(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Interior `u_y` face `(i, j)`, `1 <= j < ny`.
    fn uy(&self, i: usize, j: usize) -> usize {
        self.nx * self.ny + (j - 1) * self.nx + i
    }
}

fn add_square(b: &mut TripletBuilder, weight: f64, stencil: &[(usize, f64)]) {
    for &(r, cr) in stencil {
        for &(c, cc) in stencil {
            b.add(r, c, weight * cr * cc);
        }
    }
}

/// Viscous form `sum_k w_k (d_k . u)^2` over cells and interior nodes plus the
/// eliminated wall relation. `u^T A u` is the discrete `int 2 nu |Du|^2` with
/// the wall friction included.
fn viscous_matrix(grid: &Grid, params: &PhysParams, phi: &CellField, lay: &VelocityLayout, b: &mut TripletBuilder) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let area = grid.cell_area();
    let nu = params.viscosity(phi);
    for j in 0..ny {
        for i in 0..nx {
            let w = 2.0 * nu.at(i, j) * area;
            add_square(b, w, &[(lay.ux(grid.ip(i), j), 1.0 / hx), (lay.ux(i, j), -1.0 / hx)]);
            let mut dyy = Vec::with_capacity(2);
            if j + 1 < ny {
                dyy.push((lay.uy(i, j + 1), 1.0 / hy));
            }
            if j > 0 {
                dyy.push((lay.uy(i, j), -1.0 / hy));
            }
            add_square(b, w, &dyy);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let w = node_avg(grid, &nu, i, j) * area;
            add_square(
                b,
                w,
                &[
                    (lay.ux(i, j), 1.0 / hy),
                    (lay.ux(i, j - 1), -1.0 / hy),
                    (lay.uy(i, j), 1.0 / hx),
                    (lay.uy(grid.im(i), j), -1.0 / hx),
                ],
            );
        }
    }
    for wall in Wall::BOTH {
        let j = grid.wall_row(wall);
        for i in 0..nx {
            let nu_w = wall_viscosity(grid, params, phi, wall, i);
            let (c_w, _) = slip_coefficients(grid, params, nu_w);
            b.add(lay.ux(i, j), lay.ux(i, j), c_w * hx);
        }
    }
}

/// Upwind advective transport `(m . grad) u` with `m = rho u + J`.
fn momentum_transport(
    grid: &Grid,
    u: &FaceField,
    u_wall: &WallPair<Vec<f64>>,
    rho: &CellField,
    jflux: &FaceField,
) -> FaceField {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let mut mx = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            mx[j * nx + i] = face_avg_x(grid, rho, i, j) * u.x_at(i, j) + jflux.x_at(i, j);
        }
    }
    let mut my = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            my[j * nx + i] = face_avg_y(rho, i, j) * u.y_at(i, j) + jflux.y_at(i, j);
        }
    }
    let upwind = |m: f64, back: f64, here: f64, fwd: f64, hb: f64, hf: f64| {
        if m > 0.0 {
            m * (here - back) / hb
        } else {
            m * (fwd - here) / hf
        }
    };
    let mut out = FaceField::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            let (im, ip) = (grid.im(i), grid.ip(i));
            let here = u.x_at(i, j);
            let ax = mx[j * nx + i];
            let ay = 0.25 * (my[j * nx + im] + my[j * nx + i] + my[(j + 1) * nx + im] + my[(j + 1) * nx + i]);
            let (below, hb) = if j > 0 { (u.x_at(i, j - 1), hy) } else { (u_wall.bottom[i], 0.5 * hy) };
            let (above, ha) = if j + 1 < ny { (u.x_at(i, j + 1), hy) } else { (u_wall.top[i], 0.5 * hy) };
            out.x[j * nx + i] = upwind(ax, u.x_at(im, j), here, u.x_at(ip, j), hx, hx)
                + upwind(ay, below, here, above, hb, ha);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (im, ip) = (grid.im(i), grid.ip(i));
            let here = u.y_at(i, j);
            let ay = my[j * nx + i];
            let ax = 0.25 * (mx[(j - 1) * nx + i] + mx[(j - 1) * nx + ip] + mx[j * nx + i] + mx[j * nx + ip]);
            out.y[j * nx + i] = upwind(ax, u.y_at(im, j), here, u.y_at(ip, j), hx, hx)
                + upwind(ay, u.y_at(i, j - 1), here, u.y_at(i, j + 1), hy, hy);
        }
    }
    out
}

/// `-div((1/rho) grad)` with no flux through the walls; symmetric positive
/// semidefinite with the constants as kernel.
fn pressure_matrix(grid: &Grid, rho: &CellField) -> SparseMatrix {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx2, hy2) = (grid.hx * grid.hx, grid.hy * grid.hy);
    let mut b = TripletBuilder::with_capacity(nx * ny, 5 * nx * ny);
    let link = |b: &mut TripletBuilder, c: usize, d: usize, w: f64| {
        b.add(c, c, w);
        b.add(d, d, w);
        b.add(c, d, -w);
        b.add(d, c, -w);
    };
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            // face to the left, periodic
            let l = j * nx + grid.im(i);
            link(&mut b, c, l, 1.0 / (face_avg_x(grid, rho, i, j) * hx2));
            if j > 0 {
                link(&mut b, c, c - nx, 1.0 / (face_avg_y(rho, i, j) * hy2));
            }
        }
    }
    b.build()
}

fn solver_error(stage: &'static str) -> impl FnOnce(SolveError) -> Error {
    move |source| Error::Solver { stage, source }
}

/// One step with explicit options, also returning solver statistics.
pub fn ns_step_with(
    grid: &Grid,
    flow: &FlowUnknowns,
    ch: &ChUnknowns,
    params: &PhysParams,
    dt: f64,
    opts: &NsOptions,
) -> Result<(FlowUnknowns, NsReport)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let area = grid.cell_area();
    let cfl = flow.u.max_abs() * dt / hx.min(hy);

    let rho = params.density(&ch.phi);
    let jflux = params.relative_flux(&grid.grad(&ch.mu)?);
    let conv = momentum_transport(grid, &flow.u, &flow.u_wall, &rho, &jflux);
    let forcing = slip_forcing(grid, params, ch, &flow.u_wall, opts.surface_forcing);

    let lay = VelocityLayout { nx, ny };
    let mut b = TripletBuilder::with_capacity(lay.size(), 12 * lay.size());
    let mut rhs = vec![0.0; lay.size()];
    for j in 0..ny {
        for i in 0..nx {
            let im = grid.im(i);
            let r = face_avg_x(grid, &rho, i, j);
            let k = lay.ux(i, j);
            b.add(k, k, r * area / dt);
            let capillary = 0.5 * (ch.mu.at(im, j) + ch.mu.at(i, j)) * (ch.phi.at(i, j) - ch.phi.at(im, j)) / hx;
            let dp = (flow.p.at(i, j) - flow.p.at(im, j)) / hx;
            rhs[k] = area * (r * flow.u.x_at(i, j) / dt - conv.x_at(i, j) + capillary - dp);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let r = face_avg_y(&rho, i, j);
            let k = lay.uy(i, j);
            b.add(k, k, r * area / dt);
            let capillary = face_avg_y(&ch.mu, i, j) * (ch.phi.at(i, j) - ch.phi.at(i, j - 1)) / hy;
            let dp = (flow.p.at(i, j) - flow.p.at(i, j - 1)) / hy;
            rhs[k] = area * (r * flow.u.y_at(i, j) / dt - conv.y_at(i, j) + capillary - dp);
        }
    }
    viscous_matrix(grid, params, &ch.phi, &lay, &mut b);
    for wall in Wall::BOTH {
        let j = grid.wall_row(wall);
        for i in 0..nx {
            let nu_w = wall_viscosity(grid, params, &ch.phi, wall, i);
            let (_, kappa) = slip_coefficients(grid, params, nu_w);
            rhs[lay.ux(i, j)] += kappa * forcing[wall][i] * hx;
        }
    }
    let a = b.build();
    let mut guess = flow.u.x.clone();
    guess.extend_from_slice(&flow.u.y[nx..nx * ny]);
    let (x, predictor) = solve_from(&a, &rhs, Some(&guess), Method::Cg, opts.predictor_tol, opts.max_iter)
        .map_err(solver_error("momentum predictor"))?;
    let mut u = FaceField::zeros(grid);
    u.x.copy_from_slice(&x[..nx * ny]);
    u.y[nx..nx * ny].copy_from_slice(&x[nx * ny..]);

    // projection: -div(beta grad dp) = -div(u*) / dt
    let div = grid.div(&u)?;
    let mut rhs_p: Vec<f64> = div.data.iter().map(|d| -d / dt).collect();
    let mean = rhs_p.iter().sum::<f64>() / rhs_p.len() as f64;
    rhs_p.iter_mut().for_each(|v| *v -= mean);
    let bnorm = rhs_p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rel = if bnorm > 0.0 { (opts.projection_tol / (dt * bnorm)).min(0.5) } else { 1.0 };
    let pm = pressure_matrix(grid, &rho);
    let (mut dp, projection) = solve_from(&pm, &rhs_p, None, Method::Cg, rel, opts.max_iter)
        .map_err(solver_error("pressure projection"))?;
    let mean = dp.iter().sum::<f64>() / dp.len() as f64;
    dp.iter_mut().for_each(|v| *v -= mean);
    for j in 0..ny {
        for i in 0..nx {
            let im = grid.im(i);
            let beta = 1.0 / face_avg_x(grid, &rho, i, j);
            u.x[j * nx + i] -= dt * beta * (dp[j * nx + i] - dp[j * nx + im]) / hx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let beta = 1.0 / face_avg_y(&rho, i, j);
            u.y[j * nx + i] -= dt * beta * (dp[j * nx + i] - dp[(j - 1) * nx + i]) / hy;
        }
    }
    let mut p = flow.p.clone();
    p.data.iter_mut().zip(&dp).for_each(|(p, d)| *p += d);
    let mean = p.data.iter().sum::<f64>() / p.data.len() as f64;
    p.data.iter_mut().for_each(|v| *v -= mean);

    let u_wall = WallPair::from_fn(|wall| slip_velocity(grid, params, &ch.phi, &u, wall, &forcing[wall]));
    Ok((
        FlowUnknowns { u, p, u_wall },
        NsReport {
            cfl,
            predictor,
            projection,
        },
    ))
}

/// One step with default solver settings.
pub fn ns_step(
    grid: &Grid,
    flow: &FlowUnknowns,
    ch: &ChUnknowns,
    params: &PhysParams,
    dt: f64,
) -> Result<FlowUnknowns> {
    ns_step_with(grid, flow, ch, params, dt, &NsOptions::default()).map(|(f, _)| f)
}

/// `int rho/2 |u|^2` by midpoint quadrature, face velocities averaged to
/// cell centres.
pub fn kinetic_energy(grid: &Grid, flow: &FlowUnknowns, ch: &ChUnknowns, params: &PhysParams) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut e = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let ux = 0.5 * (flow.u.x_at(i, j) + flow.u.x_at(grid.ip(i), j));
            let uy = 0.5 * (flow.u.y_at(i, j) + flow.u.y_at(i, j + 1));
            e += 0.5 * params.density_at(ch.phi.at(i, j)) * (ux * ux + uy * uy);
        }
    }
    e * grid.cell_area()
}

/// `int 2 nu |Du|^2` including the half cell between the wall-adjacent
/// `u_x` and the wall.
pub fn viscous_dissipation(grid: &Grid, flow: &FlowUnknowns, phi: &CellField, params: &PhysParams) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let nu = params.viscosity(phi);
    let u = &flow.u;
    let mut d = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let dxx = (u.x_at(grid.ip(i), j) - u.x_at(i, j)) / hx;
            let dyy = (u.y_at(i, j + 1) - u.y_at(i, j)) / hy;
            d += 2.0 * nu.at(i, j) * (dxx * dxx + dyy * dyy);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let s = (u.x_at(i, j) - u.x_at(i, j - 1)) / hy + (u.y_at(i, j) - u.y_at(grid.im(i), j)) / hx;
            d += node_avg(grid, &nu, i, j) * s * s;
        }
    }
    d *= grid.cell_area();
    for wall in Wall::BOTH {
        let j = grid.wall_row(wall);
        for i in 0..nx {
            let nu_w = wall_viscosity(grid, params, phi, wall, i);
            let shear = (u.x_at(i, j) - flow.u_wall[wall][i]) / (0.5 * hy);
            d += nu_w * shear * shear * 0.5 * hy * hx;
        }
    }
    d
}

/// `int_Gamma gamma |u_tau|^2`.
pub fn slip_dissipation(grid: &Grid, flow: &FlowUnknowns, params: &PhysParams) -> f64 {
    flow.u_wall
        .iter()
        .map(|(_, w)| params.gamma_tau * grid.dot_wall(w, w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (Grid, PhysParams) {
        (Grid::new(n, n, 1.0, 1.0).unwrap(), PhysParams::default())
    }

    #[test]
    fn rest_state_is_a_fixed_point() {
        let (g, p) = setup(16);
        let ch = ChUnknowns::uniform(&g, 0.3, -0.2);
        let flow = FlowUnknowns::zeros(&g);
        let next = ns_step(&g, &flow, &ch, &p, 1e-3).unwrap();
        assert_eq!(next.u.max_abs(), 0.0);
        assert_eq!(next.p.max_abs(), 0.0);
    }

    #[test]
    fn uniform_shear_decays() {
        let (g, p) = setup(16);
        let ch = ChUnknowns::uniform(&g, 1.0, 1.0);
        let u = FaceField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        let mut flow = FlowUnknowns::from_velocity(&g, &p, u, &ch.phi);
        let mut last = kinetic_energy(&g, &flow, &ch, &p);
        for _ in 0..20 {
            flow = ns_step(&g, &flow, &ch, &p, 1e-2).unwrap();
            let e = kinetic_energy(&g, &flow, &ch, &p);
            assert!(e < last, "{e} >= {last}");
            last = e;
        }
    }

    #[test]
    fn divergence_free_input_passes_through() {
        use std::f64::consts::PI;
        let (g, p) = setup(16);
        let ch = ChUnknowns::uniform(&g, 1.0, 1.0);
        let sf = |x: f64, y: f64| (2.0 * PI * x).sin() * (PI * y).sin().powi(2) / (2.0 * PI);
        let mut u = FaceField::zeros(&g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                u.x[j * g.nx + i] = (sf(g.xf(i), g.yf(j + 1)) - sf(g.xf(i), g.yf(j))) / g.hy;
            }
        }
        for j in 0..=g.ny {
            for i in 0..g.nx {
                u.y[j * g.nx + i] = -(sf(g.xf(i + 1), g.yf(j)) - sf(g.xf(i), g.yf(j))) / g.hx;
            }
        }
        let flow = FlowUnknowns::from_velocity(&g, &p, u.clone(), &ch.phi);
        let (next, _) = ns_step_with(&g, &flow, &ch, &p, 1e-9, &NsOptions::default()).unwrap();
        let diff = next.u.x.iter().zip(&u.x).chain(next.u.y.iter().zip(&u.y));
        let worst = diff.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn projection_makes_velocity_divergence_free() {
        let (g, p) = setup(16);
        let ch = ChUnknowns {
            phi: CellField::from_fn(&g, |x, y| (6.0 * x).sin() * (4.0 * y).cos()),
            mu: CellField::from_fn(&g, |x, y| (2.0 * x + y).cos()),
            ..ChUnknowns::uniform(&g, 0.0, 0.0)
        };
        let p = PhysParams { rho1: 1.0, rho2: 5.0, nu1: 0.1, nu2: 1.0, ..p };
        let mut flow = FlowUnknowns::zeros(&g);
        for _ in 0..3 {
            let (next, report) = ns_step_with(&g, &flow, &ch, &p, 1e-3, &NsOptions::default()).unwrap();
            assert!(g.div(&next.u).unwrap().max_abs() <= 1e-9);
            assert!(next.u.y[..g.nx].iter().all(|&v| v == 0.0));
            assert!(!report.cfl_warning());
            flow = next;
        }
        assert!(flow.u.max_abs() > 1e-6);
        assert!(flow.p.data.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn viscous_matrix_is_symmetric_and_matches_dissipation() {
        let (g, p) = setup(8);
        let phi = CellField::from_fn(&g, |x, y| (3.0 * x).sin() * y);
        let p = PhysParams { nu1: 0.5, nu2: 2.0, gamma_tau: 0.0, ..p };
        let lay = VelocityLayout { nx: 8, ny: 8 };
        let mut b = TripletBuilder::new(lay.size());
        viscous_matrix(&g, &p, &phi, &lay, &mut b);
        let a = b.build();
        assert!(a.is_symmetric(1e-12));
        // with gamma = 0 the wall terms vanish and u^T A u is the interior form
        let u = FaceField::from_fn(&g, |x, y| (2.0 * x).cos() * y * y, |x, y| x * (1.0 - y) * y);
        let mut v = u.x.clone();
        v.extend_from_slice(&u.y[8..64]);
        let quad: f64 = a.mul_vec(&v).iter().zip(&v).map(|(a, b)| a * b).sum();
        let mut flow = FlowUnknowns::zeros(&g);
        flow.u = u;
        flow.u.zero_wall_normal();
        let zero = vec![0.0; 8];
        flow.u_wall = WallPair::from_fn(|w| slip_velocity(&g, &p, &phi, &flow.u, w, &zero));
        let d = viscous_dissipation(&g, &flow, &phi, &p);
        assert!((quad - d).abs() < 1e-12 * d.abs().max(1.0), "{quad} vs {d}");
    }

    #[test]
    fn kinetic_energy_examples() {
        let (g, p) = setup(8);
        let ch = ChUnknowns::uniform(&g, 1.0, 1.0);
        assert_eq!(kinetic_energy(&g, &FlowUnknowns::zeros(&g), &ch, &p), 0.0);
        let p2 = PhysParams { rho2: 2.0, ..p };
        let mut flow = FlowUnknowns::zeros(&g);
        flow.u = FaceField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        assert!((kinetic_energy(&g, &flow, &ch, &p2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kinetic_energy_converges_at_second_order() {
        use std::f64::consts::PI;
        let p = PhysParams::default();
        // rho = 1, u = (sin(2 pi x) sin(pi y), cos(pi y)): int |u|^2 / 2 = (1/4 + 1/2) / 2
        let exact = 0.375;
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let g = Grid::new(n, n, 1.0, 1.0).unwrap();
                let ch = ChUnknowns::uniform(&g, 1.0, 1.0);
                let mut flow = FlowUnknowns::zeros(&g);
                flow.u = FaceField::from_fn(
                    &g,
                    |x, y| (2.0 * PI * x).sin() * (PI * y).sin(),
                    |_, y| (PI * y).cos(),
                );
                (kinetic_energy(&g, &flow, &ch, &p) - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "order {order}");
        }
    }

    #[test]
    fn large_friction_suppresses_slip() {
        let (g, _) = setup(16);
        let ch = ChUnknowns::uniform(&g, 1.0, 1.0);
        let u = FaceField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        for gamma in [1e2, 1e4, 1e6] {
            let p = PhysParams { gamma_tau: gamma, ..PhysParams::default() };
            let flow = FlowUnknowns::from_velocity(&g, &p, u.clone(), &ch.phi);
            let slip = crate::grid::max_abs(&flow.u_wall.bottom);
            assert!(slip <= 2.0 * 2.0 / (gamma * g.hy), "{gamma}: {slip}");
        }
    }
}
