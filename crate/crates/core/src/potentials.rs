//! Double-well potentials `F` (bulk) and `G` (surface).
//!
//! The logarithmic potential is singular at `s = +-1`. Outside the band
//! `[-1 + sigma, 1 - sigma]` it is replaced by its second-order Taylor
//! polynomial at the band edge, which keeps value, slope and curvature
//! continuous and grows quadratically.

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA_REG: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `W(s) = (1 - s^2)^2 / 4 + tilt * s`. The tilt is zero for the
    /// classical symmetric well; a nonzero tilt shifts the minima and makes
    /// one phase energetically preferred (used to model wetting walls).
    PolynomialDoubleWell { tilt: f64 },
    /// `W(s) = theta/2 [(1+s)ln(1+s) + (1-s)ln(1-s)] - theta_c/2 s^2`.
    FloryHuggins {
        theta: f64,
        theta_c: f64,
        sigma_reg: f64,
    },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::polynomial()
    }
}

impl PotentialSpec {
    pub fn polynomial() -> Self {
        Self::PolynomialDoubleWell { tilt: 0.0 }
    }

    pub fn flory_huggins(theta: f64, theta_c: f64, sigma_reg: f64) -> Result<Self> {
        let spec = Self::FloryHuggins {
            theta,
            theta_c,
            sigma_reg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PolynomialDoubleWell { tilt } => {
                if !tilt.is_finite() {
                    return Err(Error::Parameter(format!("tilt must be finite, got {tilt}")));
                }
            }
            Self::FloryHuggins {
                theta,
                theta_c,
                sigma_reg,
            } => {
                if !(theta > 0.0 && theta < theta_c && theta_c.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "Flory-Huggins needs 0 < theta < theta_c, got theta = {theta}, theta_c = {theta_c}"
                    )));
                }
                if !(sigma_reg > 0.0 && sigma_reg < 0.1) {
                    return Err(Error::Parameter(format!(
                        "sigma_reg must lie in (0, 0.1), got {sigma_reg}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        check_finite(s)?;
        Ok(self.value_unchecked(s))
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        check_finite(s)?;
        Ok(self.derivative_unchecked(s))
    }

    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        check_finite(s)?;
        Ok(self.second_unchecked(s))
    }

    pub(crate) fn value_unchecked(&self, s: f64) -> f64 {
        match *self {
            Self::PolynomialDoubleWell { tilt } => {
                let a = 1.0 - s * s;
                0.25 * a * a + tilt * s
            }
            Self::FloryHuggins {
                theta,
                theta_c,
                sigma_reg,
            } => {
                let edge = 1.0 - sigma_reg;
                if s.abs() <= edge {
                    fh_value(theta, theta_c, s)
                } else {
                    let e = edge.copysign(s);
                    let d = s - e;
                    fh_value(theta, theta_c, e)
                        + fh_derivative(theta, theta_c, e) * d
                        + 0.5 * fh_second(theta, theta_c, e) * d * d
                }
            }
        }
    }

    pub(crate) fn derivative_unchecked(&self, s: f64) -> f64 {
        match *self {
            Self::PolynomialDoubleWell { tilt } => s * s * s - s + tilt,
            Self::FloryHuggins {
                theta,
                theta_c,
                sigma_reg,
            } => {
                let edge = 1.0 - sigma_reg;
                if s.abs() <= edge {
                    fh_derivative(theta, theta_c, s)
                } else {
                    let e = edge.copysign(s);
                    fh_derivative(theta, theta_c, e) + fh_second(theta, theta_c, e) * (s - e)
                }
            }
        }
    }

    pub(crate) fn second_unchecked(&self, s: f64) -> f64 {
        match *self {
            Self::PolynomialDoubleWell { .. } => 3.0 * s * s - 1.0,
            Self::FloryHuggins {
                theta,
                theta_c,
                sigma_reg,
            } => fh_second(theta, theta_c, s.clamp(-1.0 + sigma_reg, 1.0 - sigma_reg)),
        }
    }

    /// Stabilization constant `S >= sup |W''| / 2` over the admissible band
    /// (`[-1, 1]` for the polynomial, the regularized band for the logarithm).
    pub fn stabilization_constant(&self) -> f64 {
        match *self {
            // |3 s^2 - 1| peaks at s = +-1 with value 2
            Self::PolynomialDoubleWell { .. } => 1.0,
            Self::FloryHuggins {
                theta,
                theta_c,
                sigma_reg,
            } => {
                // W'' = theta / (1 - s^2) - theta_c is even and increasing in |s|;
                // its extremes are at s = 0 and at the band edge.
                let edge = theta / (sigma_reg * (2.0 - sigma_reg)) - theta_c;
                let centre = theta - theta_c;
                0.5 * edge.abs().max(centre.abs())
            }
        }
    }

    pub fn is_even(&self) -> bool {
        !matches!(self, Self::PolynomialDoubleWell { tilt } if *tilt != 0.0)
    }
}

fn check_finite(s: f64) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("potential argument {s}")))
    }
}

fn fh_value(theta: f64, theta_c: f64, s: f64) -> f64 {
    0.5 * theta * ((1.0 + s) * (1.0 + s).ln() + (1.0 - s) * (1.0 - s).ln())
        - 0.5 * theta_c * s * s
}

fn fh_derivative(theta: f64, theta_c: f64, s: f64) -> f64 {
    0.5 * theta * ((1.0 + s) / (1.0 - s)).ln() - theta_c * s
}

fn fh_second(theta: f64, theta_c: f64, s: f64) -> f64 {
    theta / (1.0 - s * s) - theta_c
}
