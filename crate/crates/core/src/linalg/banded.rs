use super::{SolveError, SparseMatrix};

/// LU factorization of a banded matrix with partial (row) pivoting.
///
/// Column-major band storage as in LAPACK `gbtrf`: entry `(i, j)` lives at
/// `ab[j * ld + kl + ku + i - j]`, leaving `kl` extra super-diagonals for
/// pivoting fill.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, SolveError> {
        let n = a.dim();
        let (kl, ku) = a.bandwidth();
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; n * ld];
        let mut scale = 0.0_f64;
        for i in 0..n {
            for (j, v) in a.row(i) {
                ab[j * ld + kv + i - j] = v;
                scale = scale.max(v.abs());
            }
        }
        let tiny = scale * f64::EPSILON * n as f64;
        let mut ipiv = vec![0; n];
        for k in 0..n {
            let km = kl.min(n - 1 - k);
            let col = k * ld + kv;
            let mut p = 0;
            let mut best = ab[col].abs();
            for r in 1..=km {
                let v = ab[col + r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(SolveError::SingularPivot { row: k });
            }
            ipiv[k] = k + p;
            let jmax = (k + kv).min(n - 1);
            if p != 0 {
                for j in k..=jmax {
                    let base = j * ld + kv + k - j;
                    ab.swap(base, base + p);
                }
            }
            let pivot = ab[col];
            for r in 1..=km {
                ab[col + r] /= pivot;
            }
            if km == 0 {
                continue;
            }
            for j in k + 1..=jmax {
                let base = j * ld + kv + k - j;
                let akj = ab[base];
                if akj == 0.0 {
                    continue;
                }
                for r in 1..=km {
                    let l = ab[col + r];
                    ab[base + r] -= l * akj;
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            ld,
            ab,
            ipiv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl, ld) = (self.n, self.kl, self.ld);
        let kv = self.kl + self.ku;
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == 0.0 {
                continue;
            }
            let km = kl.min(n - 1 - k);
            let col = k * ld + kv;
            for r in 1..=km {
                x[k + r] -= self.ab[col + r] * xk;
            }
        }
        for k in (0..n).rev() {
            let col = k * ld + kv;
            x[k] /= self.ab[col];
            let xk = x[k];
            if xk == 0.0 {
                continue;
            }
            let top = k.saturating_sub(kv);
            for i in top..k {
                x[i] -= self.ab[col + i - k] * xk;
            }
        }
    }
}
