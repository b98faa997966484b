//! Physical parameters and constitutive closures.

use crate::error::{Error, Result};
use crate::grid::{CellField, FaceField};

/// Parameter in `[0, inf]`; `K` and `L` select Dirichlet, Robin or Neumann
/// coupling at their endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Zero,
    Finite(f64),
    Infinite,
}

impl Coupling {
    pub fn from_value(v: f64) -> Result<Self> {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Parameter(format!(
                "coupling parameter must lie in [0, inf], got {v}"
            )));
        }
        Ok(if v == 0.0 {
            Coupling::Zero
        } else if v.is_infinite() {
            Coupling::Infinite
        } else {
            Coupling::Finite(v)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Coupling::Zero => 0.0,
            Coupling::Finite(v) => v,
            Coupling::Infinite => f64::INFINITY,
        }
    }
}

/// `h(r) = 1/r` on `(0, inf)`, zero at both endpoints.
pub fn h_of(r: f64) -> Result<f64> {
    Ok(match Coupling::from_value(r)? {
        Coupling::Finite(v) => 1.0 / v,
        Coupling::Zero | Coupling::Infinite => 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysParams {
    pub rho1: f64,
    pub rho2: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Bulk mobility `m_Omega`.
    pub mob_bulk: f64,
    /// Surface mobility `m_Gamma`.
    pub mob_surf: f64,
    pub eps: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: Coupling,
    pub l: Coupling,
    pub gamma_tau: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            nu1: 1.0,
            nu2: 1.0,
            mob_bulk: 1.0,
            mob_surf: 1.0,
            eps: 0.02,
            delta: 0.02,
            alpha: 1.0,
            beta: 1.0,
            k: Coupling::Finite(1.0),
            l: Coupling::Finite(1.0),
            gamma_tau: 1.0,
        }
    }
}

impl PhysParams {
    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("eps", self.eps),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let nonneg = [
            ("m_bulk", self.mob_bulk),
            ("m_surf", self.mob_surf),
            ("gamma_tau", self.gamma_tau),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite, got {v}"));
            }
        }
        if self.k == Coupling::Zero && self.alpha == 0.0 {
            out.push("K=0 requires alpha ≠ 0".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter(v.join("; ")))
        }
    }

    fn clamp_phase(phi: f64) -> f64 {
        phi.clamp(-1.0, 1.0)
    }

    pub fn density_at(&self, phi: f64) -> f64 {
        let p = Self::clamp_phase(phi);
        0.5 * self.rho2 * (1.0 + p) + 0.5 * self.rho1 * (1.0 - p)
    }

    pub fn viscosity_at(&self, phi: f64) -> f64 {
        let p = Self::clamp_phase(phi);
        0.5 * self.nu2 * (1.0 + p) + 0.5 * self.nu1 * (1.0 - p)
    }

    pub fn density(&self, phi: &CellField) -> CellField {
        map_cells(phi, |p| self.density_at(p))
    }

    pub fn viscosity(&self, phi: &CellField) -> CellField {
        map_cells(phi, |p| self.viscosity_at(p))
    }

    /// `-(rho2 - rho1) / 2 * m_Omega`
    pub fn flux_prefactor(&self) -> f64 {
        -0.5 * (self.rho2 - self.rho1) * self.mob_bulk
    }

    /// Relative mass flux `J = -(rho2 - rho1)/2 m_Omega grad mu` on faces.
    pub fn relative_flux(&self, grad_mu: &FaceField) -> FaceField {
        let c = self.flux_prefactor();
        FaceField {
            nx: grad_mu.nx,
            ny: grad_mu.ny,
            x: grad_mu.x.iter().map(|g| c * g).collect(),
            y: grad_mu.y.iter().map(|g| c * g).collect(),
        }
    }
}

fn map_cells(c: &CellField, f: impl Fn(f64) -> f64) -> CellField {
    CellField {
        nx: c.nx,
        ny: c.ny,
        data: c.data.iter().map(|&v| f(v)).collect(),
    }
}
