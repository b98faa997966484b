//! Energies, dissipation rates, masses, residuals and the contact angle.
//!
//! Quadratures are midpoint and match the discrete energy of the steppers:
//! the half cell between the wall-adjacent cell centre and the wall is
//! accounted for through the same wall flux the Cahn-Hilliard step uses.

use crate::ch::{wall_mass_flux, wall_phi_normal_derivative, ChUnknowns, Potentials};
use crate::coupled::State;
use crate::grid::{CellField, Grid, Wall, WallPair};
use crate::model::{Coupling, PhysParams};
use crate::ns::{kinetic_energy, slip_dissipation, viscous_dissipation, FlowUnknowns};

/// Everything reported at one diagnostic time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub e_total: f64,
    pub e_kinetic: f64,
    pub e_bulk_gl: f64,
    pub e_surf_gl: f64,
    pub e_penalty: f64,
    pub d_visc: f64,
    pub d_slip: f64,
    pub d_bulk_mob: f64,
    pub d_surf_mob: f64,
    pub d_robin: f64,
    pub m_bulk: f64,
    pub m_surf: f64,
    pub m_combined: f64,
    pub r_div: f64,
    pub r_sdiv: f64,
    pub r_form: f64,
    pub contact_angle_deg: Option<f64>,
    pub band_violation: f64,
}

impl DiagnosticsRecord {
    /// Names of the reported quantities in declaration order, `time` excluded.
    pub const FIELDS: [&'static str; 18] = [
        "E_total",
        "E_kinetic",
        "E_bulk_GL",
        "E_surf_GL",
        "E_penalty",
        "D_visc",
        "D_slip",
        "D_bulk_mob",
        "D_surf_mob",
        "D_robin",
        "M_bulk",
        "M_surf",
        "M_combined",
        "R_div",
        "R_sdiv",
        "R_form",
        "contact_angle_deg",
        "band_violation",
    ];

    /// Values in the order of [`Self::FIELDS`]; an absent angle is NaN.
    pub fn values(&self) -> [f64; 18] {
        [
            self.e_total,
            self.e_kinetic,
            self.e_bulk_gl,
            self.e_surf_gl,
            self.e_penalty,
            self.d_visc,
            self.d_slip,
            self.d_bulk_mob,
            self.d_surf_mob,
            self.d_robin,
            self.m_bulk,
            self.m_surf,
            self.m_combined,
            self.r_div,
            self.r_sdiv,
            self.r_form,
            self.contact_angle_deg.unwrap_or(f64::NAN),
            self.band_violation,
        ]
    }

    pub fn dissipation_total(&self) -> f64 {
        self.d_visc + self.d_slip + self.d_bulk_mob + self.d_surf_mob + self.d_robin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub bulk_gl: f64,
    pub surf_gl: f64,
    pub penalty: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.bulk_gl + self.surf_gl + self.penalty
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationParts {
    pub visc: f64,
    pub slip: f64,
    pub bulk_mob: f64,
    pub surf_mob: f64,
    pub robin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masses {
    pub bulk: f64,
    pub surf: WallPair<f64>,
    pub combined: f64,
}

impl Masses {
    pub fn surf_total(&self) -> f64 {
        self.surf.bottom + self.surf.top
    }
}

fn wall_trace_from_derivative(grid: &Grid, phi: &CellField, dn: &WallPair<Vec<f64>>) -> WallPair<Vec<f64>> {
    // outward derivative (phi_w - phi_0) / (hy/2)
    WallPair::from_fn(|wall| {
        phi.wall_row(wall)
            .iter()
            .zip(&dn[wall])
            .map(|(p0, d)| p0 + 0.5 * grid.hy * d)
            .collect()
    })
}

/// Free energy without the kinetic part.
pub fn free_energy(grid: &Grid, params: &PhysParams, pots: &Potentials, ch: &ChUnknowns) -> EnergyParts {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let eps = params.eps;
    let mut grad2 = 0.0;
    let mut pot = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let c = ch.phi.at(i, j);
            let gx = (c - ch.phi.at(grid.im(i), j)) / hx;
            grad2 += gx * gx;
            if j > 0 {
                let gy = (c - ch.phi.at(i, j - 1)) / hy;
                grad2 += gy * gy;
            }
            pot += pots.bulk.value_unchecked(c);
        }
    }
    let dn = wall_phi_normal_derivative(grid, params, ch);
    let mut bulk = (0.5 * eps * grad2 + pot / eps) * grid.cell_area();
    for (_, d) in dn.iter() {
        bulk += d.iter().map(|v| 0.5 * eps * v * v * 0.5 * hy).sum::<f64>() * hx;
    }

    let mut surf = 0.0;
    for (_, psi) in ch.psi.iter() {
        for i in 0..nx {
            let g = (psi[i] - psi[grid.im(i)]) / hx;
            surf += 0.5 * params.delta * g * g + pots.surface.value_unchecked(psi[i]) / params.delta;
        }
    }
    surf *= hx;

    let penalty = match params.k {
        Coupling::Finite(k) => {
            let trace = wall_trace_from_derivative(grid, &ch.phi, &dn);
            Wall::BOTH
                .iter()
                .map(|&w| {
                    ch.psi[w]
                        .iter()
                        .zip(&trace[w])
                        .map(|(ps, t)| {
                            let gap = params.alpha * ps - t;
                            0.5 / k * gap * gap
                        })
                        .sum::<f64>()
                        * hx
                })
                .sum()
        }
        Coupling::Zero | Coupling::Infinite => 0.0,
    };
    EnergyParts {
        kinetic: 0.0,
        bulk_gl: bulk,
        surf_gl: surf,
        penalty,
    }
}

pub fn total_energy(grid: &Grid, state: &State, params: &PhysParams, pots: &Potentials) -> EnergyParts {
    EnergyParts {
        kinetic: kinetic_energy(grid, &state.flow, &state.ch, params),
        ..free_energy(grid, params, pots, &state.ch)
    }
}

pub fn dissipation_terms(grid: &Grid, state: &State, params: &PhysParams) -> DissipationParts {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let mu = &state.ch.mu;
    let mut grad2 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let gx = (mu.at(i, j) - mu.at(grid.im(i), j)) / hx;
            grad2 += gx * gx;
            if j > 0 {
                let gy = (mu.at(i, j) - mu.at(i, j - 1)) / hy;
                grad2 += gy * gy;
            }
        }
    }
    let m = params.mob_bulk;
    let mut bulk_mob = m * grad2 * grid.cell_area();
    let flux = wall_mass_flux(grid, params, &state.ch);
    let mut robin = 0.0;
    if m > 0.0 {
        for wall in Wall::BOTH {
            let trace: Vec<f64> = mu
                .wall_row(wall)
                .iter()
                .zip(&flux[wall])
                .map(|(m0, w)| m0 + 0.5 * hy * w / m)
                .collect();
            bulk_mob += flux[wall].iter().map(|w| w * w / m * 0.5 * hy).sum::<f64>() * hx;
            if let Coupling::Finite(l) = params.l {
                robin += state.ch.theta[wall]
                    .iter()
                    .zip(&trace)
                    .map(|(th, t)| {
                        let gap = params.beta * th - t;
                        gap * gap / l
                    })
                    .sum::<f64>()
                    * hx;
            }
        }
    }
    let mut surf_mob = 0.0;
    for (_, th) in state.ch.theta.iter() {
        for i in 0..nx {
            let g = (th[i] - th[grid.im(i)]) / hx;
            surf_mob += g * g;
        }
    }
    surf_mob *= params.mob_surf * hx;
    DissipationParts {
        visc: viscous_dissipation(grid, &state.flow, &state.ch.phi, params),
        slip: slip_dissipation(grid, &state.flow, params),
        bulk_mob,
        surf_mob,
        robin,
    }
}

pub fn masses(grid: &Grid, ch: &ChUnknowns, params: &PhysParams) -> Masses {
    let bulk = grid.integrate_cells(&ch.phi);
    let surf = ch.psi.map(|_, w| grid.integrate_wall(w));
    Masses {
        bulk,
        surf,
        combined: params.beta * bulk + surf.bottom + surf.top,
    }
}

/// `(max |div u|, max |d_x u_tau|)` over the cells and both walls.
pub fn incompressibility_residuals(grid: &Grid, flow: &FlowUnknowns) -> (f64, f64) {
    let div = grid.div(&flow.u).map(|d| d.max_abs()).unwrap_or(f64::NAN);
    let sdiv = flow
        .u_wall
        .iter()
        .map(|(_, w)| {
            grid.surface_div(w)
                .map(|d| crate::grid::max_abs(&d))
                .unwrap_or(f64::NAN)
        })
        .fold(0.0, f64::max);
    (div, sdiv)
}

/// Pointwise potentials used by [`formulation_residual_with`].
pub struct PotentialFns<'a> {
    pub bulk: &'a dyn Fn(f64) -> f64,
    pub bulk_prime: &'a dyn Fn(f64) -> f64,
    pub surface: &'a dyn Fn(f64) -> f64,
    pub surface_prime: &'a dyn Fn(f64) -> f64,
}

/// Consistency residual between the capillary force written through the
/// chemical potential, `mu grad phi - grad f`, and through the stress,
/// `-eps div(grad phi (x) grad phi)`, with `f = eps/2 |grad phi|^2 + F/eps`
/// and `mu` recomputed from `phi`; plus the analogous tangential wall identity
/// with `g = delta/2 |psi'|^2 + G/delta + h(K)/2 (alpha psi - phi)^2`.
/// Both vanish for exact fields, so the result measures truncation error.
pub fn formulation_residual(grid: &Grid, ch: &ChUnknowns, params: &PhysParams, pots: &Potentials) -> f64 {
    let f = |s: f64| pots.bulk.value_unchecked(s);
    let fp = |s: f64| pots.bulk.derivative_unchecked(s);
    let g = |s: f64| pots.surface.value_unchecked(s);
    let gp = |s: f64| pots.surface.derivative_unchecked(s);
    formulation_residual_with(
        grid,
        ch,
        params,
        &PotentialFns {
            bulk: &f,
            bulk_prime: &fp,
            surface: &g,
            surface_prime: &gp,
        },
    )
}

pub fn formulation_residual_with(grid: &Grid, ch: &ChUnknowns, params: &PhysParams, pots: &PotentialFns<'_>) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let eps = params.eps;
    let phi = &ch.phi;
    let at = |i: usize, j: usize| phi.at(i, j);
    let dx = |i: usize, j: usize| (at(grid.ip(i), j) - at(grid.im(i), j)) / (2.0 * hx);
    let dy = |i: usize, j: usize| (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy);
    let lap = |i: usize, j: usize| {
        (at(grid.ip(i), j) - 2.0 * at(i, j) + at(grid.im(i), j)) / (hx * hx)
            + (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hy * hy)
    };
    // density f and stress components where centred differences reach
    let mut fd = CellField::zeros(grid);
    let mut sxx = CellField::zeros(grid);
    let mut sxy = CellField::zeros(grid);
    let mut syy = CellField::zeros(grid);
    for j in 1..ny - 1 {
        for i in 0..nx {
            let (gx, gy) = (dx(i, j), dy(i, j));
            fd.set(i, j, 0.5 * eps * (gx * gx + gy * gy) + (pots.bulk)(at(i, j)) / eps);
            sxx.set(i, j, gx * gx);
            sxy.set(i, j, gx * gy);
            syy.set(i, j, gy * gy);
        }
    }
    let mut bulk = 0.0;
    for j in 2..ny.saturating_sub(2) {
        for i in 0..nx {
            let (ip, im) = (grid.ip(i), grid.im(i));
            let mu = -eps * lap(i, j) + (pots.bulk_prime)(at(i, j)) / eps;
            let (gx, gy) = (dx(i, j), dy(i, j));
            let fx = (fd.at(ip, j) - fd.at(im, j)) / (2.0 * hx);
            let fy = (fd.at(i, j + 1) - fd.at(i, j - 1)) / (2.0 * hy);
            let div_x = (sxx.at(ip, j) - sxx.at(im, j)) / (2.0 * hx) + (sxy.at(i, j + 1) - sxy.at(i, j - 1)) / (2.0 * hy);
            let div_y = (sxy.at(ip, j) - sxy.at(im, j)) / (2.0 * hx) + (syy.at(i, j + 1) - syy.at(i, j - 1)) / (2.0 * hy);
            let rx = mu * gx - fx + eps * div_x;
            let ry = mu * gy - fy + eps * div_y;
            bulk += rx * rx + ry * ry;
        }
    }
    bulk *= grid.cell_area();

    let hk = match params.k {
        Coupling::Finite(k) => 1.0 / k,
        _ => 0.0,
    };
    let (alpha, delta) = (params.alpha, params.delta);
    let mut wall = 0.0;
    for w in Wall::BOTH {
        let psi = &ch.psi[w];
        let trace = grid.wall_trace(phi, w).unwrap_or_else(|_| vec![0.0; nx]);
        let dn = grid
            .normal_derivative(phi, w, crate::grid::WallTrace::Extrapolated)
            .unwrap_or_else(|_| vec![0.0; nx]);
        let d = |v: &[f64], i: usize| (v[grid.ip(i)] - v[grid.im(i)]) / (2.0 * hx);
        let d2 = |v: &[f64], i: usize| (v[grid.ip(i)] - 2.0 * v[i] + v[grid.im(i)]) / (hx * hx);
        let theta: Vec<f64> = (0..nx)
            .map(|i| -delta * d2(psi, i) + (pots.surface_prime)(psi[i]) / delta + alpha * eps * dn[i])
            .collect();
        let gdens: Vec<f64> = (0..nx)
            .map(|i| {
                let gap = alpha * psi[i] - trace[i];
                0.5 * delta * d(psi, i).powi(2) + (pots.surface)(psi[i]) / delta + 0.5 * hk * gap * gap
            })
            .collect();
        let sq: Vec<f64> = (0..nx).map(|i| d(psi, i).powi(2)).collect();
        for i in 0..nx {
            let (psx, phx) = (d(psi, i), d(&trace, i));
            let gap = alpha * psi[i] - trace[i];
            let lhs = eps * dn[i] * phx - delta * d(&sq, i);
            let rhs = theta[i] * psx - d(&gdens, i) - eps * dn[i] * (alpha * psx - phx) + hk * gap * (alpha * psx - phx);
            wall += (lhs - rhs).powi(2);
        }
    }
    wall *= hx;
    (bulk + wall).sqrt()
}

/// Angle in degrees, measured through the `phi > 0` phase, between `wall` and
/// the zero level set of `phi`, averaged over all crossings of the
/// wall-adjacent row. `None` when the level set does not reach the wall.
pub fn contact_angle(grid: &Grid, phi: &CellField, wall: Wall) -> Option<f64> {
    let nx = grid.nx;
    let j0 = grid.wall_row(wall);
    let j1 = match wall {
        Wall::Bottom => 1,
        Wall::Top => grid.ny - 2,
    };
    let crossings = |j: usize| -> Vec<(f64, f64)> {
        (0..nx)
            .filter_map(|i| {
                let (a, b) = (phi.at(i, j), phi.at(grid.ip(i), j));
                if (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0) {
                    let x = grid.xc(i) + grid.hx * a / (a - b);
                    Some((x, if b > a { 1.0 } else { -1.0 }))
                } else {
                    None
                }
            })
            .collect()
    };
    let near = crossings(j0);
    let next = crossings(j1);
    let lx = grid.lx;
    let periodic = |d: f64| d - lx * (d / lx).round();
    let mut sum = 0.0;
    let mut count = 0;
    for &(x0, dir) in &near {
        let partner = next
            .iter()
            .filter(|&&(_, d)| d == dir)
            .map(|&(x1, _)| periodic(x1 - x0))
            .min_by(|a, b| a.abs().total_cmp(&b.abs()));
        let Some(dx) = partner else { continue };
        if dx.abs() > 4.0 * grid.hy.max(grid.hx) {
            continue;
        }
        let len = (dx * dx + grid.hy * grid.hy).sqrt();
        sum += (dir * dx / len).acos().to_degrees();
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Full record at `state.time`. The contact angle is measured at the bottom
/// wall.
pub fn record(grid: &Grid, state: &State, params: &PhysParams, pots: &Potentials) -> DiagnosticsRecord {
    let e = total_energy(grid, state, params, pots);
    let d = dissipation_terms(grid, state, params);
    let m = masses(grid, &state.ch, params);
    let (r_div, r_sdiv) = incompressibility_residuals(grid, &state.flow);
    DiagnosticsRecord {
        time: state.time,
        e_total: e.total(),
        e_kinetic: e.kinetic,
        e_bulk_gl: e.bulk_gl,
        e_surf_gl: e.surf_gl,
        e_penalty: e.penalty,
        d_visc: d.visc,
        d_slip: d.slip,
        d_bulk_mob: d.bulk_mob,
        d_surf_mob: d.surf_mob,
        d_robin: d.robin,
        m_bulk: m.bulk,
        m_surf: m.surf_total(),
        m_combined: m.combined,
        r_div,
        r_sdiv,
        r_form: formulation_residual(grid, &state.ch, params, pots),
        contact_angle_deg: contact_angle(grid, &state.ch.phi, Wall::Bottom),
        band_violation: state.ch.band_violation(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FaceField;

    fn state(grid: &Grid, ch: ChUnknowns) -> State {
        State {
            time: 0.0,
            flow: FlowUnknowns::zeros(grid),
            ch,
        }
    }

    #[test]
    fn pure_phase_has_zero_energy() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let s = state(&g, ChUnknowns::uniform(&g, 1.0, 1.0));
        for k in [0.0, 1.0, f64::INFINITY] {
            let p = PhysParams { k: Coupling::from_value(k).unwrap(), ..PhysParams::default() };
            let e = total_energy(&g, &s, &p, &Potentials::default());
            assert_eq!(e.total(), 0.0);
        }
    }

    #[test]
    fn constant_state_energy() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let s = state(&g, ChUnknowns::uniform(&g, 0.0, 0.0));
        let p = PhysParams { eps: 1.0, delta: 1.0, k: Coupling::Infinite, ..PhysParams::default() };
        let e = total_energy(&g, &s, &p, &Potentials::default());
        assert!((e.total() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn penalty_example() {
        // K = 2, alpha = 1, phi = 0 at the wall, psi = 1: 1/2 * 1/2 * 1 * |Gamma|
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let p = PhysParams { k: Coupling::Finite(2.0), ..PhysParams::default() };
        let s = state(&g, ChUnknowns::uniform(&g, 0.0, 1.0));
        let e = total_energy(&g, &s, &p, &Potentials::default());
        // the eliminated trace sits slightly off zero, so the gap is
        // K eps / (hy/2 + K eps) instead of 1 and tends to 1 under refinement
        let gap = |g: &Grid| 2.0 * p.eps / (0.5 * g.hy + 2.0 * p.eps);
        assert!((e.penalty - gap(&g).powi(2) / 2.0).abs() < 1e-12, "{}", e.penalty);
        let fine = Grid::new(8, 4096, 1.0, 1.0).unwrap();
        let sf = state(&fine, ChUnknowns::uniform(&fine, 0.0, 1.0));
        let ef = total_energy(&fine, &sf, &p, &Potentials::default());
        assert!((ef.penalty - 0.5).abs() < 0.5 * (1.0 - gap(&fine).powi(2)) + 1e-12);
        assert!(ef.penalty > e.penalty);
        // discrete boundary energy equals half-cell gradient energy plus penalty
        let a = 1.0 / (0.5 * g.hy + 2.0 * p.eps);
        let expected = 0.5 * p.eps * a * 2.0;
        let half_cell = e.bulk_gl - 0.25 / p.eps;
        assert!((half_cell + e.penalty - expected).abs() < 1e-12);
    }

    #[test]
    fn dissipation_examples() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let p = PhysParams { gamma_tau: 3.0, ..PhysParams::default() };
        let zero = state(&g, ChUnknowns::uniform(&g, 0.0, 0.0));
        let d = dissipation_terms(&g, &zero, &p);
        assert_eq!((d.visc, d.slip, d.bulk_mob, d.surf_mob, d.robin), (0.0, 0.0, 0.0, 0.0, 0.0));

        // uniform velocity with the wall moving along: no shear, only friction
        let mut s = state(&g, ChUnknowns::uniform(&g, 1.0, 1.0));
        s.flow.u = FaceField::from_fn(&g, |_, _| 2.0, |_, _| 0.0);
        s.flow.u_wall = WallPair::new(vec![2.0; 8], vec![2.0; 8]);
        let d = dissipation_terms(&g, &s, &p);
        assert!(d.visc.abs() < 1e-14);
        assert!((d.slip - 3.0 * 4.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn wall_flux_split_matches_transfer_rate() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let p = PhysParams { l: Coupling::Finite(0.5), beta: 2.0, mob_bulk: 0.7, ..PhysParams::default() };
        let mut ch = ChUnknowns::uniform(&g, 0.0, 0.0);
        ch.mu = CellField::constant(&g, 0.3);
        ch.theta = WallPair::new(vec![1.0; 8], vec![-1.0; 8]);
        let s = state(&g, ch.clone());
        let d = dissipation_terms(&g, &s, &p);
        let b = 0.7 / (0.5 * g.hy + 0.7 * 0.5);
        let expected = b * ((2.0f64 - 0.3).powi(2) + (-2.0f64 - 0.3).powi(2)) * g.lx;
        assert!((d.bulk_mob + d.robin - expected).abs() < 1e-12);
        assert!(d.robin > 0.0);
    }

    #[test]
    fn masses_examples() {
        let g = Grid::new(10, 8, 2.0, 0.5).unwrap();
        let p = PhysParams { beta: 3.0, ..PhysParams::default() };
        let ch = ChUnknowns::uniform(&g, 0.4, -0.5);
        let m = masses(&g, &ch, &p);
        assert!((m.bulk - 0.4).abs() < 1e-14);
        assert!((m.surf_total() + 2.0).abs() < 1e-14);
        assert!((m.combined - (1.2 - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn incompressibility_examples() {
        use std::f64::consts::PI;
        let g = Grid::new(32, 8, 1.0, 1.0).unwrap();
        let mut flow = FlowUnknowns::zeros(&g);
        flow.u = FaceField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        flow.u_wall = WallPair::new(vec![1.0; 32], vec![1.0; 32]);
        assert_eq!(incompressibility_residuals(&g, &flow), (0.0, 0.0));
        flow.u_wall.bottom = (0..32).map(|i| (2.0 * PI * g.xf(i)).sin()).collect();
        let (_, s) = incompressibility_residuals(&g, &flow);
        assert!((s - 2.0 * PI).abs() < 0.05 * 2.0 * PI, "{s}");
    }

    #[test]
    fn formulation_residual_examples() {
        let g = Grid::new(32, 32, 1.0, 1.0).unwrap();
        let p = PhysParams::default();
        let pots = Potentials::default();
        let ch = ChUnknowns::uniform(&g, 0.3, 0.2);
        assert_eq!(formulation_residual(&g, &ch, &p, &pots), 0.0);

        use std::f64::consts::PI;
        let smooth = |n: usize| {
            let g = Grid::new(n, n, 1.0, 1.0).unwrap();
            let phi = CellField::from_fn(&g, |x, y| (2.0 * PI * x).sin() * (PI * y).sin());
            let psi = WallPair::new(g.wall_from_fn(|x| 0.5 * (2.0 * PI * x).cos()), vec![0.1; n]);
            let ch = ChUnknowns { phi, psi, ..ChUnknowns::uniform(&g, 0.0, 0.0) };
            (g, ch)
        };
        let (g, ch) = smooth(32);
        let p = PhysParams { eps: 0.1, delta: 0.1, ..p };
        let base = formulation_residual(&g, &ch, &p, &pots);
        let f = |s: f64| pots.bulk.value(s).unwrap() + 7.5;
        let fp = |s: f64| pots.bulk.derivative(s).unwrap();
        let gv = |s: f64| pots.surface.value(s).unwrap() - 3.0;
        let gp = |s: f64| pots.surface.derivative(s).unwrap();
        let shifted = formulation_residual_with(
            &g,
            &ch,
            &p,
            &PotentialFns { bulk: &f, bulk_prime: &fp, surface: &gv, surface_prime: &gp },
        );
        assert!((shifted - base).abs() <= 1e-8 * base, "{shifted} vs {base}");

        let r: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let (g, ch) = smooth(n);
                formulation_residual(&g, &ch, &p, &pots)
            })
            .collect();
        assert!((r[0] / r[1]).log2() > 1.0 && (r[1] / r[2]).log2() > 1.0, "{r:?}");
    }

    #[test]
    fn contact_angle_examples() {
        let g = Grid::new(64, 64, 1.0, 1.0).unwrap();
        let eps = 0.02;
        let vertical = CellField::from_fn(&g, |x, _| ((x - 0.37) / (2f64.sqrt() * eps)).tanh());
        let a = contact_angle(&g, &vertical, Wall::Bottom).unwrap();
        assert!((a - 90.0).abs() < 2.0, "{a}");
        let b = contact_angle(&g, &vertical, Wall::Top).unwrap();
        assert!((b - 90.0).abs() < 2.0, "{b}");

        let flat = CellField::from_fn(&g, |_, y| ((y - 0.5) / eps).tanh());
        assert_eq!(contact_angle(&g, &flat, Wall::Bottom), None);

        // phi > 0 inside a trapezoid whose sides meet the wall at 60 degrees
        let t = 60f64.to_radians();
        let tilted = CellField::from_fn(&g, |x, y| {
            let left = (x - 0.3) * t.sin() - y * t.cos();
            let right = (0.7 - x) * t.sin() - y * t.cos();
            left.min(right) / eps
        });
        let c = contact_angle(&g, &tilted, Wall::Bottom).unwrap();
        assert!((c - 60.0).abs() < 1.0, "{c}");
    }

    #[test]
    fn energy_is_shift_invariant() {
        let g = Grid::new(16, 12, 1.0, 1.0).unwrap();
        let p = PhysParams::default();
        let pots = Potentials::default();
        let ch = ChUnknowns {
            phi: CellField::from_fn(&g, |x, y| (6.0 * x).sin() * y),
            psi: WallPair::new(g.wall_from_fn(|x| (6.0 * x).cos()), g.wall_from_fn(|x| x.sin())),
            ..ChUnknowns::uniform(&g, 0.0, 0.0)
        };
        let mut shifted = ch.clone();
        for j in 0..g.ny {
            for i in 0..g.nx {
                shifted.phi.set((i + 5) % g.nx, j, ch.phi.at(i, j));
            }
        }
        for w in Wall::BOTH {
            for i in 0..g.nx {
                shifted.psi[w][(i + 5) % g.nx] = ch.psi[w][i];
            }
        }
        let a = free_energy(&g, &p, &pots, &ch).total();
        let b = free_energy(&g, &p, &pots, &shifted).total();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }
}
