use super::{dot, norm2, Method, SolveError, SolveStats, SparseMatrix};

fn jacobi(a: &SparseMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

fn finish(
    a: &SparseMatrix,
    b: &[f64],
    x: Vec<f64>,
    iterations: usize,
    tol: f64,
    bnorm: f64,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let residual = a.residual_norm(&x, b);
    if residual <= tol * bnorm {
        Ok((
            x,
            SolveStats {
                iterations,
                residual,
                rhs_norm: bnorm,
            },
        ))
    } else {
        Err(SolveError::NotConverged {
            iterations,
            relative: if bnorm > 0.0 { residual / bnorm } else { residual },
            best: x,
        })
    }
}

fn true_residual(a: &SparseMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.mul_into(x, r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
}

pub(super) fn cg(
    a: &SparseMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let n = a.dim();
    let bnorm = norm2(b.iter().copied());
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                residual: 0.0,
                rhs_norm: 0.0,
            },
        ));
    }
    let minv = jacobi(a);
    let mut r = vec![0.0; n];
    true_residual(a, b, &x, &mut r);
    if norm2(r.iter().copied()) <= tol * bnorm {
        return finish(a, b, x, 0, tol, bnorm);
    }
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while it < max_iter {
        it += 1;
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(SolveError::Breakdown {
                method: Method::Cg,
                iteration: it,
                what: "non-positive curvature p.Ap",
            });
        }
        let step = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += step * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= step * api);
        if norm2(r.iter().copied()) <= tol * bnorm {
            // confirm against the true residual; restart from it if the
            // recurrence has drifted
            true_residual(a, b, &x, &mut r);
            if norm2(r.iter().copied()) <= tol * bnorm {
                return finish(a, b, x, it, tol, bnorm);
            }
            z.iter_mut().zip(r.iter().zip(&minv)).for_each(|(zi, (ri, mi))| *zi = ri * mi);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        z.iter_mut().zip(r.iter().zip(&minv)).for_each(|(zi, (ri, mi))| *zi = ri * mi);
        let rz_new = dot(&r, &z);
        if rz == 0.0 {
            return Err(SolveError::Breakdown {
                method: Method::Cg,
                iteration: it,
                what: "vanishing r.z",
            });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    finish(a, b, x, it, tol, bnorm)
}

pub(super) fn bicgstab(
    a: &SparseMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let n = a.dim();
    let bnorm = norm2(b.iter().copied());
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                residual: 0.0,
                rhs_norm: 0.0,
            },
        ));
    }
    let minv = jacobi(a);
    let mut r = vec![0.0; n];
    true_residual(a, b, &x, &mut r);
    if norm2(r.iter().copied()) <= tol * bnorm {
        return finish(a, b, x, 0, tol, bnorm);
    }
    let breakdown = |iteration, what| SolveError::Breakdown {
        method: Method::BiCgStab,
        iteration,
        what,
    };
    let mut r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut fresh = true;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(breakdown(it, "r_hat orthogonal to residual"));
        }
        if fresh {
            p.copy_from_slice(&r);
            fresh = false;
        } else {
            if omega == 0.0 {
                return Err(breakdown(it, "vanishing stabilization weight"));
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
        }
        rho = rho_new;
        y.iter_mut().zip(p.iter().zip(&minv)).for_each(|(yi, (pi, mi))| *yi = pi * mi);
        a.mul_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return Err(breakdown(it, "r_hat orthogonal to A p"));
        }
        alpha = rho / rv;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm2(s.iter().copied()) <= tol * bnorm {
            x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi += alpha * yi);
            true_residual(a, b, &x, &mut r);
            if norm2(r.iter().copied()) <= tol * bnorm {
                return finish(a, b, x, it, tol, bnorm);
            }
            r_hat.copy_from_slice(&r);
            fresh = true;
            continue;
        }
        z.iter_mut().zip(s.iter().zip(&minv)).for_each(|(zi, (si, mi))| *zi = si * mi);
        a.mul_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        if norm2(r.iter().copied()) <= tol * bnorm {
            true_residual(a, b, &x, &mut r);
            if norm2(r.iter().copied()) <= tol * bnorm {
                return finish(a, b, x, it, tol, bnorm);
            }
            r_hat.copy_from_slice(&r);
            fresh = true;
        }
    }
    finish(a, b, x, it, tol, bnorm)
}
