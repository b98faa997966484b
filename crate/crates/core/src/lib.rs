//! Finite-difference solver for incompressible two-phase flow with a
//! bulk-surface Cahn-Hilliard phase field, dynamic boundary conditions and
//! generalized Navier slip, on a periodic channel bounded by two flat walls.
//!
//! Module map:
//!
//! * [`grid`]: staggered grid, field layouts, discrete operators
//! * [`potentials`], [`model`]: double-well potentials and constitutive laws
//! * [`linalg`]: CSR matrices, Krylov and banded direct solvers
//! * [`ch`]: one linearly implicit step of the bulk-surface Cahn-Hilliard system
//! * [`ns`]: one projection step of variable-density Navier-Stokes with slip
//! * [`coupled`]: splitting, variants, initial conditions, time integration
//! * [`diagnostics`]: energies, dissipation rates, masses, residuals, contact angle
//! * [`config`], [`io`]: run configuration and on-disk artifacts
//! * [`studies`]: equilibration and refinement studies

pub mod ch;
pub mod config;
pub mod coupled;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod ns;
pub mod potentials;
pub mod studies;

pub use ch::{ChUnknowns, CouplingCase, Potentials};
pub use coupled::{State, Variant, VariantConfig};
pub use diagnostics::DiagnosticsRecord;
pub use error::{Error, Result};
pub use grid::{CellField, FaceField, Grid, Wall, WallPair};
pub use model::{Coupling, PhysParams};
pub use ns::FlowUnknowns;
pub use potentials::PotentialSpec;
