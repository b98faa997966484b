//! Compressed-row sparse matrices and the linear solvers used by the steppers.

mod banded;
mod krylov;

pub use banded::BandedLu;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Jacobi-preconditioned conjugate gradients (symmetric positive (semi)definite).
    Cg,
    /// Jacobi-preconditioned BiCGStab.
    BiCgStab,
    /// Banded LU with partial pivoting.
    DirectBanded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||A x - b||_2`, recomputed from the returned iterate.
    pub residual: f64,
    pub rhs_norm: f64,
}

impl SolveStats {
    pub fn relative_residual(&self) -> f64 {
        if self.rhs_norm > 0.0 {
            self.residual / self.rhs_norm
        } else {
            self.residual
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("dimension mismatch: matrix is {rows}x{cols}, right-hand side has {rhs}")]
    Dimension { rows: usize, cols: usize, rhs: usize },
    #[error("no convergence after {iterations} iterations (relative residual {relative:.3e})")]
    NotConverged {
        iterations: usize,
        relative: f64,
        best: Vec<f64>,
    },
    #[error("breakdown in {method:?} at iteration {iteration}: {what}")]
    Breakdown {
        method: Method,
        iteration: usize,
        what: &'static str,
    },
    #[error("singular pivot in banded LU at row {row}")]
    SingularPivot { row: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Square CSR matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n, "({row}, {col}) outside {}", self.n);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseMatrix {
        // stable sort keeps the summation order of duplicates deterministic
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.cols == other.cols
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `(lower, upper)` bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut up = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    up = up.max(j - i);
                }
            }
        }
        (lo, up)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        norm2(ax.iter().zip(b).map(|(a, b)| a - b))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .all(|(j, v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0))
        })
    }
}

pub(crate) fn norm2(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` to `||A x - b|| <= tol ||b||` from a zero initial guess.
pub fn solve(
    a: &SparseMatrix,
    b: &[f64],
    method: Method,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    solve_from(a, b, None, method, tol, max_iter)
}

/// As [`solve`], starting the Krylov methods from `guess`.
pub fn solve_from(
    a: &SparseMatrix,
    b: &[f64],
    guess: Option<&[f64]>,
    method: Method,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    if b.len() != a.dim() || guess.is_some_and(|g| g.len() != a.dim()) {
        return Err(SolveError::Dimension {
            rows: a.dim(),
            cols: a.dim(),
            rhs: b.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(SolveError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let x0 = guess.map_or_else(|| vec![0.0; a.dim()], <[f64]>::to_vec);
    match method {
        Method::Cg => krylov::cg(a, b, x0, tol, max_iter),
        Method::BiCgStab => krylov::bicgstab(a, b, x0, tol, max_iter),
        Method::DirectBanded => {
            let lu = BandedLu::factor(a)?;
            let x = lu.solve(b);
            let stats = SolveStats {
                iterations: 1,
                residual: a.residual_norm(&x, b),
                rhs_norm: norm2(b.iter().copied()),
            };
            Ok((x, stats))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_laplacian(n: usize, shift: f64) -> SparseMatrix {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0 + shift);
            b.add(i, (i + 1) % n, -1.0);
            b.add(i, (i + n - 1) % n, -1.0);
        }
        b.build()
    }

    fn reference_x(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.5).collect()
    }

    #[test]
    fn builder_sums_duplicates_and_sorts() {
        let mut b = TripletBuilder::new(3);
        b.add(1, 2, 1.0);
        b.add(1, 0, 2.0);
        b.add(1, 2, 0.5);
        b.add(0, 0, 1.0);
        let m = b.build();
        assert_eq!(m.triplets(), vec![(0, 0, 1.0), (1, 0, 2.0), (1, 2, 1.5)]);
        assert_eq!(m.get(2, 2), 0.0);
        assert_eq!(m.bandwidth(), (1, 1));
    }

    #[test]
    fn identity_in_one_iteration() {
        let a = SparseMatrix::identity(10);
        let b: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        for m in [Method::Cg, Method::BiCgStab, Method::DirectBanded] {
            let (x, stats) = solve(&a, &b, m, 1e-12, 100).unwrap();
            assert_eq!(x, b, "{m:?}");
            assert!(stats.iterations <= 1);
        }
    }

    #[test]
    fn manufactured_rhs_recovered() {
        let n = 64;
        let a = periodic_laplacian(n, 1.0);
        let xr = reference_x(n);
        let b = a.mul_vec(&xr);
        for m in [Method::Cg, Method::BiCgStab, Method::DirectBanded] {
            let (x, stats) = solve(&a, &b, m, 1e-10, 500).unwrap();
            assert!(stats.relative_residual() <= 1e-10, "{m:?}");
            assert!((stats.residual - a.residual_norm(&x, &b)).abs() < 1e-14);
            let err = x.iter().zip(&xr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "{m:?}: {err}");
        }
    }

    #[test]
    fn singular_laplacian_null_space() {
        let n = 32;
        let a = periodic_laplacian(n, 0.0);
        let mut xr = reference_x(n);
        let mean = xr.iter().sum::<f64>() / n as f64;
        xr.iter_mut().for_each(|v| *v -= mean);
        let b = a.mul_vec(&xr);
        let (x, _) = solve(&a, &b, Method::Cg, 1e-12, 1000).unwrap();
        let xmean = x.iter().sum::<f64>() / n as f64;
        assert!(xmean.abs() < 1e-12);
        assert!(x.iter().zip(&xr).all(|(a, b)| (a - b).abs() < 1e-9));

        let ones = vec![1.0; n];
        match solve(&a, &ones, Method::Cg, 1e-12, 1000) {
            Err(SolveError::NotConverged { .. }) | Err(SolveError::Breakdown { .. }) => {}
            other => panic!("expected failure, got {other:?}"),
        }
        assert!(matches!(
            solve(&a, &ones, Method::DirectBanded, 1e-12, 1),
            Err(SolveError::SingularPivot { .. })
        ) || solve(&a, &ones, Method::DirectBanded, 1e-12, 1)
            .map(|(x, _)| x.iter().any(|v| !v.is_finite() || v.abs() > 1e12))
            .unwrap_or(true));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseMatrix::identity(4);
        assert!(matches!(
            solve(&a, &[1.0; 3], Method::Cg, 1e-8, 10),
            Err(SolveError::Dimension { .. })
        ));
        assert!(matches!(
            solve(&a, &[1.0; 4], Method::Cg, 0.0, 10),
            Err(SolveError::Invalid(_))
        ));
    }

    #[test]
    fn non_convergence_keeps_best_iterate() {
        let n = 200;
        let a = periodic_laplacian(n, 1e-4);
        let b = a.mul_vec(&reference_x(n));
        match solve(&a, &b, Method::Cg, 1e-14, 3) {
            Err(SolveError::NotConverged { iterations, best, relative }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), n);
                let r = a.residual_norm(&best, &b) / norm2(b.iter().copied());
                assert!((r - relative).abs() <= 1e-12 * r.max(1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cg_error_energy_norm_is_monotone() {
        // CG minimizes the A-norm of the error over growing Krylov spaces.
        let n = 48;
        let a = periodic_laplacian(n, 0.5);
        let xr = reference_x(n);
        let b = a.mul_vec(&xr);
        let mut last = f64::INFINITY;
        for it in 1..40 {
            let x = match solve(&a, &b, Method::Cg, 1e-15, it) {
                Ok((x, _)) => x,
                Err(SolveError::NotConverged { best, .. }) => best,
                Err(e) => panic!("{e}"),
            };
            let e: Vec<f64> = x.iter().zip(&xr).map(|(a, b)| a - b).collect();
            let energy = dot(&e, &a.mul_vec(&e)).sqrt();
            assert!(energy <= last * (1.0 + 10.0 * f64::EPSILON) + 1e-15, "{it}: {energy} > {last}");
            last = energy;
        }
    }

    #[test]
    fn nonsymmetric_bicgstab_and_banded_agree() {
        let n = 40;
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 4.0);
            b.add(i, (i + 1) % n, -1.5);
            b.add(i, (i + n - 1) % n, -0.5);
            if i + 3 < n {
                b.add(i, i + 3, 0.25);
            }
        }
        let a = b.build();
        let xr = reference_x(n);
        let rhs = a.mul_vec(&xr);
        let (x1, _) = solve(&a, &rhs, Method::BiCgStab, 1e-12, 200).unwrap();
        let (x2, _) = solve(&a, &rhs, Method::DirectBanded, 1e-12, 1).unwrap();
        for k in 0..n {
            assert!((x1[k] - xr[k]).abs() < 1e-9);
            assert!((x2[k] - xr[k]).abs() < 1e-12);
        }
    }
}
