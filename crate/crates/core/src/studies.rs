//! Refinement studies and equilibration runs built on the coupled stepper.

use crate::coupled::{State, Stepper, VariantConfig};
use crate::error::{Error, Result};
use crate::grid::{CellField, Grid};

/// Outcome of [`equilibrate`].
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub state: State,
    pub steps: usize,
    /// `max |phi^{n+1} - phi^n|` of the last step.
    pub last_change: f64,
    pub converged: bool,
}

/// Steps until the per-step change of `phi` drops below `tol` or
/// `max_steps` is reached.
pub fn equilibrate(grid: &Grid, config: &VariantConfig, initial: State, tol: f64, max_steps: usize) -> Result<Equilibrium> {
    let mut stepper = Stepper::new(grid, config, &initial)?;
    let mut state = initial;
    let mut last_change = f64::INFINITY;
    for k in 1..=max_steps {
        let (next, _) = stepper.step(&state)?;
        last_change = next
            .ch
            .phi
            .data
            .iter()
            .zip(&state.ch.phi.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        state = next;
        if last_change < tol {
            return Ok(Equilibrium { state, steps: k, last_change, converged: true });
        }
    }
    Ok(Equilibrium { state, steps: max_steps, last_change, converged: false })
}

/// Averages 2 x 2 blocks of a cell field onto the next coarser grid.
pub fn restrict(fine: &CellField) -> Result<CellField> {
    if fine.nx % 2 != 0 || fine.ny % 2 != 0 {
        return Err(Error::Sizing(format!("cannot coarsen a {} x {} field", fine.nx, fine.ny)));
    }
    let (nx, ny) = (fine.nx / 2, fine.ny / 2);
    let mut data = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            data[j * nx + i] =
                0.25 * (fine.at(2 * i, 2 * j) + fine.at(2 * i + 1, 2 * j) + fine.at(2 * i, 2 * j + 1) + fine.at(2 * i + 1, 2 * j + 1));
        }
    }
    Ok(CellField { nx, ny, data })
}

/// Discrete L2 norm of `a - b` on `grid`.
pub fn l2_difference(grid: &Grid, a: &CellField, b: &CellField) -> f64 {
    let s: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).powi(2)).sum();
    (s * grid.cell_area()).sqrt()
}

/// Errors between successive levels and the observed orders
/// `log2(e_k / e_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl OrderStudy {
    pub fn from_errors(errors: Vec<f64>) -> Self {
        let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Self { errors, orders }
    }
}

fn advance(grid: &Grid, config: &VariantConfig, initial: State, steps: usize) -> Result<State> {
    let mut stepper = Stepper::new(grid, config, &initial)?;
    let mut state = initial;
    for _ in 0..steps {
        state = stepper.step(&state)?.0;
    }
    Ok(state)
}

/// Spatial self-convergence of `phi`: each grid in `grids` (successively
/// doubled) is integrated for `steps` steps of the same `config`, the finer
/// solution is restricted onto the coarser grid and compared.
pub fn spatial_study(
    grids: &[Grid],
    config: &VariantConfig,
    initial: impl Fn(&Grid) -> Result<State>,
    steps: usize,
) -> Result<OrderStudy> {
    let finals: Vec<CellField> = grids
        .iter()
        .map(|g| advance(g, config, initial(g)?, steps).map(|s| s.ch.phi))
        .collect::<Result<_>>()?;
    let errors = grids
        .windows(2)
        .zip(finals.windows(2))
        .map(|(g, f)| {
            let coarse = restrict(&f[1])?;
            if coarse.nx != g[0].nx || coarse.ny != g[0].ny {
                return Err(Error::Sizing("grids must double in each direction".into()));
            }
            Ok(l2_difference(&g[0], &f[0], &coarse))
        })
        .collect::<Result<_>>()?;
    Ok(OrderStudy::from_errors(errors))
}

/// Temporal self-convergence of `phi` at time `t_end`: time steps
/// `config.dt / 2^k` for `k < levels`, successive solutions compared.
pub fn temporal_study(grid: &Grid, config: &VariantConfig, initial: &State, t_end: f64, levels: usize) -> Result<OrderStudy> {
    let finals: Vec<CellField> = (0..levels)
        .map(|k| {
            let mut c = config.clone();
            c.dt = config.dt / f64::from(1u32 << k);
            let steps = crate::coupled::step_count(t_end, c.dt);
            advance(grid, &c, initial.clone(), steps).map(|s| s.ch.phi)
        })
        .collect::<Result<_>>()?;
    let errors = finals.windows(2).map(|f| l2_difference(grid, &f[0], &f[1])).collect();
    Ok(OrderStudy::from_errors(errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_preserves_the_integral() {
        let fine_grid = Grid::new(16, 12, 2.0, 1.0).unwrap();
        let f = CellField::from_fn(&fine_grid, |x, y| x * x + (3.0 * y).sin());
        let c = restrict(&f).unwrap();
        assert_eq!((c.nx, c.ny), (8, 6));
        let fine_sum: f64 = f.data.iter().sum::<f64>() * fine_grid.cell_area();
        let coarse_sum: f64 = c.data.iter().sum::<f64>() * fine_grid.cell_area() * 4.0;
        assert!((fine_sum - coarse_sum).abs() < 1e-12);
        assert!(restrict(&CellField { nx: 3, ny: 2, data: vec![0.0; 6] }).is_err());
    }

    #[test]
    fn orders_from_errors() {
        let s = OrderStudy::from_errors(vec![4.0, 1.0, 0.25]);
        assert_eq!(s.orders, vec![2.0, 2.0]);
    }
}
