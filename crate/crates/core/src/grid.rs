//! Staggered periodic channel and the discrete operators that live on it.
//!
//! The domain is `[0, Lx) x (0, Ly)`, periodic in `x`, bounded by two flat
//! walls at `y = 0` (bottom) and `y = Ly` (top). Layout:
//!
//! * cell fields (`phi`, `mu`, `p`) sit at cell centres `((i + 1/2) hx, (j + 1/2) hy)`,
//!   stored row-major (`j * nx + i`);
//! * `u_x` sits on vertical faces `(i hx, (j + 1/2) hy)`, `nx * ny` values;
//! * `u_y` sits on horizontal faces `((i + 1/2) hx, j hy)`, `nx * (ny + 1)` values,
//!   rows `0` and `ny` being the walls;
//! * wall fields (`psi`, `theta`) sit at the x-positions of cell centres, `nx`
//!   values per wall. Tangential derivatives of wall fields live on the wall
//!   faces `i hx`, again `nx` values.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Smallest admissible cell count per direction.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Bottom,
    Top,
}

impl Wall {
    pub const BOTH: [Wall; 2] = [Wall::Bottom, Wall::Top];

    /// y-component of the outward unit normal.
    pub fn normal_sign(self) -> f64 {
        match self {
            Wall::Bottom => -1.0,
            Wall::Top => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wall::Bottom => "bottom",
            Wall::Top => "top",
        }
    }
}

/// One value per wall.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallPair<T> {
    pub bottom: T,
    pub top: T,
}

impl<T> WallPair<T> {
    pub fn new(bottom: T, top: T) -> Self {
        Self { bottom, top }
    }

    pub fn from_fn(mut f: impl FnMut(Wall) -> T) -> Self {
        Self {
            bottom: f(Wall::Bottom),
            top: f(Wall::Top),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Wall, &T) -> U) -> WallPair<U> {
        WallPair {
            bottom: f(Wall::Bottom, &self.bottom),
            top: f(Wall::Top, &self.top),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Wall, &T)> {
        [(Wall::Bottom, &self.bottom), (Wall::Top, &self.top)].into_iter()
    }
}

impl<T> Index<Wall> for WallPair<T> {
    type Output = T;
    fn index(&self, wall: Wall) -> &T {
        match wall {
            Wall::Bottom => &self.bottom,
            Wall::Top => &self.top,
        }
    }
}

impl<T> IndexMut<Wall> for WallPair<T> {
    fn index_mut(&mut self, wall: Wall) -> &mut T {
        match wall {
            Wall::Bottom => &mut self.bottom,
            Wall::Top => &mut self.top,
        }
    }
}

/// Cell-centred scalar field, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![value; grid.nx * grid.ny],
        }
    }

    /// Samples `f(x, y)` at cell centres.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.nx * grid.ny);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.xc(i), grid.yc(j)));
            }
        }
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nx + i] = v;
    }

    /// Row adjacent to `wall`.
    pub fn wall_row(&self, wall: Wall) -> &[f64] {
        let j = match wall {
            Wall::Bottom => 0,
            Wall::Top => self.ny - 1,
        };
        &self.data[j * self.nx..(j + 1) * self.nx]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }
}

/// Face-centred vector field on the MAC layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub nx: usize,
    pub ny: usize,
    /// x-component on vertical faces, `nx * ny`.
    pub x: Vec<f64>,
    /// y-component on horizontal faces, `nx * (ny + 1)`; rows 0 and `ny` are walls.
    pub y: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            x: vec![0.0; grid.nx * grid.ny],
            y: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Samples `(fx, fy)` at the matching face centres. Wall rows of the
    /// y-component are sampled too; callers wanting `u . n = 0` zero them.
    pub fn from_fn(
        grid: &Grid,
        mut fx: impl FnMut(f64, f64) -> f64,
        mut fy: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                out.x[j * grid.nx + i] = fx(grid.xf(i), grid.yc(j));
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                out.y[j * grid.nx + i] = fy(grid.xc(i), grid.yf(j));
            }
        }
        out
    }

    #[inline]
    pub fn x_at(&self, i: usize, j: usize) -> f64 {
        self.x[j * self.nx + i]
    }

    #[inline]
    pub fn y_at(&self, i: usize, j: usize) -> f64 {
        self.y[j * self.nx + i]
    }

    pub fn zero_wall_normal(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        self.y[..nx].fill(0.0);
        self.y[ny * nx..].fill(0.0);
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.x).max(max_abs(&self.y))
    }
}

/// How the wall value of a cell field is obtained for [`Grid::normal_derivative`].
#[derive(Debug, Clone, Copy)]
pub enum WallTrace<'a> {
    /// No wall value: second-order one-sided difference through the three
    /// cells nearest the wall.
    Extrapolated,
    /// Caller supplies the wall value; second-order one-sided difference
    /// through the wall value and the two nearest cells.
    Given(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::Sizing(format!(
                "cell counts must be at least {MIN_CELLS}, got {nx} x {ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::Sizing(format!(
                "domain extents must be positive and finite, got {lx} x {ly}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
        })
    }

    #[inline]
    pub fn xc(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx
    }

    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy
    }

    #[inline]
    pub fn xf(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    #[inline]
    pub fn yf(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    #[inline]
    pub fn ip(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    pub fn im(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// `|Omega|`
    pub fn volume(&self) -> f64 {
        self.lx * self.ly
    }

    /// `|Gamma|`, both walls together.
    pub fn boundary_length(&self) -> f64 {
        2.0 * self.lx
    }

    /// Row index of the cells touching `wall`.
    pub fn wall_row(&self, wall: Wall) -> usize {
        match wall {
            Wall::Bottom => 0,
            Wall::Top => self.ny - 1,
        }
    }

    /// Samples `f(x)` at wall nodes.
    pub fn wall_from_fn(&self, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
        (0..self.nx).map(|i| f(self.xc(i))).collect()
    }

    fn check_cell(&self, c: &CellField) -> Result<()> {
        if c.nx != self.nx || c.ny != self.ny || c.data.len() != self.nx * self.ny {
            return Err(Error::Shape(format!(
                "cell field {}x{} (len {}) on grid {}x{}",
                c.nx,
                c.ny,
                c.data.len(),
                self.nx,
                self.ny
            )));
        }
        Ok(())
    }

    fn check_face(&self, v: &FaceField) -> Result<()> {
        if v.nx != self.nx
            || v.ny != self.ny
            || v.x.len() != self.nx * self.ny
            || v.y.len() != self.nx * (self.ny + 1)
        {
            return Err(Error::Shape(format!(
                "face field {}x{} on grid {}x{}",
                v.nx, v.ny, self.nx, self.ny
            )));
        }
        Ok(())
    }

    fn check_wall(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.nx {
            return Err(Error::Shape(format!(
                "wall field of length {} on grid with nx = {}",
                w.len(),
                self.nx
            )));
        }
        Ok(())
    }

    /// Centred differences onto faces. Wall rows of the y-component are left
    /// at zero; the wall-normal derivative is [`Grid::normal_derivative`]'s job.
    pub fn grad(&self, c: &CellField) -> Result<FaceField> {
        self.check_cell(c)?;
        let (nx, ny) = (self.nx, self.ny);
        let mut g = FaceField::zeros(self);
        for j in 0..ny {
            let row = &c.data[j * nx..(j + 1) * nx];
            for i in 0..nx {
                g.x[j * nx + i] = (row[i] - row[self.im(i)]) / self.hx;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                g.y[j * nx + i] = (c.data[j * nx + i] - c.data[(j - 1) * nx + i]) / self.hy;
            }
        }
        Ok(g)
    }

    /// Conservative divergence to cell centres, wall rows of `v.y` included.
    pub fn div(&self, v: &FaceField) -> Result<CellField> {
        self.check_face(v)?;
        let (nx, ny) = (self.nx, self.ny);
        let mut d = CellField::zeros(self);
        for j in 0..ny {
            for i in 0..nx {
                d.data[j * nx + i] = (v.x[j * nx + self.ip(i)] - v.x[j * nx + i]) / self.hx
                    + (v.y[(j + 1) * nx + i] - v.y[j * nx + i]) / self.hy;
            }
        }
        Ok(d)
    }

    /// Five-point Laplacian with zero flux through the walls.
    pub fn laplacian(&self, c: &CellField) -> Result<CellField> {
        self.div(&self.grad(c)?)
    }

    /// Tangential derivative of a wall field, evaluated on wall faces
    /// (`out[i]` sits at `x = i hx`, between nodes `i - 1` and `i`).
    pub fn surface_grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_wall(w)?;
        Ok((0..self.nx)
            .map(|i| (w[i] - w[self.im(i)]) / self.hx)
            .collect())
    }

    /// Divergence of a face-located tangential field back to wall nodes.
    pub fn surface_div(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_wall(v)?;
        Ok((0..self.nx)
            .map(|i| (v[self.ip(i)] - v[i]) / self.hx)
            .collect())
    }

    /// Periodic three-point Laplace-Beltrami operator on a flat wall.
    pub fn surface_laplacian(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_wall(w)?;
        let h2 = self.hx * self.hx;
        Ok((0..self.nx)
            .map(|i| (w[self.ip(i)] - 2.0 * w[i] + w[self.im(i)]) / h2)
            .collect())
    }

    /// Outward normal derivative of `c` at `wall`, second-order one-sided.
    pub fn normal_derivative(
        &self,
        c: &CellField,
        wall: Wall,
        trace: WallTrace<'_>,
    ) -> Result<Vec<f64>> {
        self.check_cell(c)?;
        let nx = self.nx;
        let (j0, j1, j2) = match wall {
            Wall::Bottom => (0, 1, 2),
            Wall::Top => (self.ny - 1, self.ny - 2, self.ny - 3),
        };
        // outward derivative is minus the derivative into the domain
        let sign = -1.0;
        let h = self.hy;
        match trace {
            WallTrace::Extrapolated => Ok((0..nx)
                .map(|i| {
                    let (c0, c1, c2) = (c.at(i, j0), c.at(i, j1), c.at(i, j2));
                    sign * (-2.0 * c0 + 3.0 * c1 - c2) / h
                })
                .collect()),
            WallTrace::Given(values) => {
                self.check_wall(values)?;
                Ok((0..nx)
                    .map(|i| {
                        let (c0, c1) = (c.at(i, j0), c.at(i, j1));
                        sign * (-8.0 * values[i] + 9.0 * c0 - c1) / (3.0 * h)
                    })
                    .collect())
            }
        }
    }

    /// Second-order extrapolation of a cell field to the wall.
    pub fn wall_trace(&self, c: &CellField, wall: Wall) -> Result<Vec<f64>> {
        self.check_cell(c)?;
        let (j0, j1, j2) = match wall {
            Wall::Bottom => (0, 1, 2),
            Wall::Top => (self.ny - 1, self.ny - 2, self.ny - 3),
        };
        Ok((0..self.nx)
            .map(|i| (15.0 * c.at(i, j0) - 10.0 * c.at(i, j1) + 3.0 * c.at(i, j2)) / 8.0)
            .collect())
    }

    /// Bulk inner product with cell-area weights.
    pub fn dot_cells(&self, a: &CellField, b: &CellField) -> f64 {
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum::<f64>() * self.cell_area()
    }

    /// Face inner product; every face carries weight `hx * hy`.
    pub fn dot_faces(&self, a: &FaceField, b: &FaceField) -> f64 {
        let sx: f64 = a.x.iter().zip(&b.x).map(|(x, y)| x * y).sum();
        let sy: f64 = a.y.iter().zip(&b.y).map(|(x, y)| x * y).sum();
        (sx + sy) * self.cell_area()
    }

    pub fn dot_wall(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.hx
    }

    pub fn integrate_cells(&self, c: &CellField) -> f64 {
        c.data.iter().sum::<f64>() * self.cell_area()
    }

    pub fn integrate_wall(&self, w: &[f64]) -> f64 {
        w.iter().sum::<f64>() * self.hx
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Grid {
        Grid::new(n, n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn spacings() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        assert_eq!((g.hx, g.hy), (0.125, 0.125));
        let g = Grid::new(16, 8, 2.0, 1.0).unwrap();
        assert_eq!((g.hx, g.hy), (0.125, 0.125));
        assert_eq!(g.boundary_length(), 4.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(8, 8, -1.0, 1.0), Err(Error::Sizing(_))));
        assert!(matches!(Grid::new(7, 8, 1.0, 1.0), Err(Error::Sizing(_))));
        assert!(matches!(Grid::new(8, 8, 1.0, f64::NAN), Err(Error::Sizing(_))));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = unit(8);
        let c = CellField::zeros(&unit(16));
        assert!(matches!(g.grad(&c), Err(Error::Shape(_))));
        assert!(matches!(g.surface_grad(&[0.0; 5]), Err(Error::Shape(_))));
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = unit(12);
        let c = CellField::constant(&g, 3.5);
        assert_eq!(g.grad(&c).unwrap().max_abs(), 0.0);
        assert_eq!(g.laplacian(&c).unwrap().max_abs(), 0.0);
        let w = vec![-2.0; 12];
        assert_eq!(max_abs(&g.surface_grad(&w).unwrap()), 0.0);
        assert_eq!(max_abs(&g.surface_laplacian(&w).unwrap()), 0.0);
        for wall in Wall::BOTH {
            let dn = g.normal_derivative(&c, wall, WallTrace::Extrapolated).unwrap();
            assert!(max_abs(&dn) < 1e-12);
        }
        let v = FaceField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        assert_eq!(g.div(&v).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sine_gradient_and_laplacian() {
        let k = 2.0 * PI;
        for n in [16, 32] {
            let g = unit(n);
            let c = CellField::from_fn(&g, |x, _| (k * x).sin());
            let gr = g.grad(&c).unwrap();
            let mut err = 0.0_f64;
            for j in 0..n {
                for i in 0..n {
                    err = err.max((gr.x_at(i, j) - k * (k * g.xf(i)).cos()).abs());
                }
            }
            assert!(err < k * k * k * g.hx * g.hx / 12.0, "grad err {err}");
            let lap = g.div(&gr).unwrap();
            let mut err = 0.0_f64;
            for (idx, v) in lap.data.iter().enumerate() {
                err = err.max((v + k * k * c.data[idx]).abs());
            }
            assert!(err < k.powi(4) * g.hx * g.hx / 12.0 + 1e-12, "lap err {err}");
        }
    }

    #[test]
    fn surface_operators_on_sine() {
        let k = 2.0 * PI;
        let g = unit(32);
        let w = g.wall_from_fn(|x| (k * x).sin());
        let sg = g.surface_grad(&w).unwrap();
        let sl = g.surface_laplacian(&w).unwrap();
        for i in 0..32 {
            assert!((sg[i] - k * (k * g.xf(i)).cos()).abs() < 0.01 * k);
            assert!((sl[i] + k * k * w[i]).abs() < 0.01 * k * k);
        }
    }

    #[test]
    fn normal_derivative_examples() {
        let g = unit(16);
        let lin = CellField::from_fn(&g, |_, y| y);
        let b = g.normal_derivative(&lin, Wall::Bottom, WallTrace::Extrapolated).unwrap();
        let t = g.normal_derivative(&lin, Wall::Top, WallTrace::Extrapolated).unwrap();
        assert!(b.iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(t.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let quad = CellField::from_fn(&g, |_, y| y * y);
        let b = g.normal_derivative(&quad, Wall::Bottom, WallTrace::Extrapolated).unwrap();
        let t = g.normal_derivative(&quad, Wall::Top, WallTrace::Extrapolated).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-12));
        assert!(t.iter().all(|v| (v - 2.0).abs() < 1e-12));

        let wall_vals = vec![1.0; 16];
        let t = g
            .normal_derivative(&quad, Wall::Top, WallTrace::Given(&wall_vals))
            .unwrap();
        assert!(t.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn wall_trace_is_exact_for_quadratics() {
        let g = unit(8);
        let quad = CellField::from_fn(&g, |_, y| 1.0 + 2.0 * y - y * y);
        let b = g.wall_trace(&quad, Wall::Bottom).unwrap();
        let t = g.wall_trace(&quad, Wall::Top).unwrap();
        assert!(b.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert!(t.iter().all(|v| (v - 2.0).abs() < 1e-13));
    }

    fn random_cell(g: &Grid, vals: &[f64]) -> CellField {
        CellField {
            nx: g.nx,
            ny: g.ny,
            data: vals.iter().cycle().take(g.nx * g.ny).copied().collect(),
        }
    }

    proptest! {
        #[test]
        fn grad_div_adjoint(vals in prop::collection::vec(-1.0f64..1.0, 97),
                            fx in prop::collection::vec(-1.0f64..1.0, 89),
                            fy in prop::collection::vec(-1.0f64..1.0, 83)) {
            let g = Grid::new(10, 9, 1.3, 0.7).unwrap();
            let c = random_cell(&g, &vals);
            let mut v = FaceField::zeros(&g);
            for (k, x) in v.x.iter_mut().enumerate() { *x = fx[k % fx.len()]; }
            for (k, y) in v.y.iter_mut().enumerate() { *y = fy[k % fy.len()]; }
            let lhs = g.dot_cells(&g.div(&v).unwrap(), &c);
            let rhs = -g.dot_faces(&v, &g.grad(&c).unwrap());
            let nx = g.nx;
            let wall = g.dot_wall(&v.y[g.ny * nx..], c.wall_row(Wall::Top))
                - g.dot_wall(&v.y[..nx], c.wall_row(Wall::Bottom));
            let scale = g.dot_cells(&c, &c).sqrt() * g.dot_faces(&v, &v).sqrt() / g.hx;
            prop_assert!((lhs - rhs - wall).abs() <= 1e-12 * scale);
        }

        #[test]
        fn surface_summation_by_parts(w in prop::collection::vec(-1.0f64..1.0, 16)) {
            let g = Grid::new(16, 8, 2.0, 1.0).unwrap();
            let lhs = g.dot_wall(&w, &g.surface_laplacian(&w).unwrap());
            let sg = g.surface_grad(&w).unwrap();
            let rhs = -g.dot_wall(&sg, &sg);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }

        #[test]
        fn operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0,
                                f in prop::collection::vec(-1.0f64..1.0, 64),
                                h in prop::collection::vec(-1.0f64..1.0, 64)) {
            let g = unit(8);
            let cf = random_cell(&g, &f);
            let ch = random_cell(&g, &h);
            let combo = CellField { nx: 8, ny: 8,
                data: cf.data.iter().zip(&ch.data).map(|(x, y)| a * x + b * y).collect() };
            let lc = g.laplacian(&combo).unwrap();
            let lf = g.laplacian(&cf).unwrap();
            let lh = g.laplacian(&ch).unwrap();
            for k in 0..64 {
                let expect = a * lf.data[k] + b * lh.data[k];
                prop_assert!((lc.data[k] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
            }
            for wall in Wall::BOTH {
                let dc = g.normal_derivative(&combo, wall, WallTrace::Extrapolated).unwrap();
                let df = g.normal_derivative(&cf, wall, WallTrace::Extrapolated).unwrap();
                let dh = g.normal_derivative(&ch, wall, WallTrace::Extrapolated).unwrap();
                for i in 0..8 {
                    let expect = a * df[i] + b * dh[i];
                    prop_assert!((dc[i] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
                }
            }
        }
    }
}
