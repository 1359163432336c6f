//! Small eigenvalue machinery for the grid estimators.
//!
//! 1D grids give symmetric tridiagonal pencils, handled by Sturm bisection
//! plus inverse iteration. 2D grids give a sparse five-point operator,
//! handled by deflated inverse power iteration with a Jacobi-preconditioned
//! conjugate gradient inner solve. Both paths only ever need the smallest
//! nonzero eigenvalue of a positive semidefinite operator whose kernel is
//! known exactly.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag` of length `n`, `off` of length `n-1`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `tau` (Sturm count through the
    /// LDLᵀ pivots of `T - τI`).
    pub fn count_below(&self, tau: f64) -> usize {
        let n = self.n();
        let mut count = 0usize;
        let mut d = self.diag[0] - tau;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let mut denom = d;
            if denom == 0.0 {
                denom = f64::MIN_POSITIVE;
            }
            d = self.diag[i] - tau - self.off[i - 1] * self.off[i - 1] / denom;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_interval(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.n() {
            return Err(Error::invalid(format!(
                "eigenvalue index {k} out of range for n = {}",
                self.n()
            )));
        }
        let (mut lo, mut hi) = self.spectral_interval();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * scale {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    /// Solves `(T - σI) x = b` by tridiagonal LU with partial pivoting
    /// (the shift sits near an eigenvalue, so pivoting matters). Row swaps
    /// introduce one extra superdiagonal of fill-in.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut d: Vec<f64> = (0..n).map(|i| self.diag[i] - sigma).collect();
        let mut up1 = vec![0.0; n];
        let mut up2 = vec![0.0; n];
        up1[..n - 1].copy_from_slice(&self.off);
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            // active rows: i = (d[i], up1[i], up2[i]), i+1 = (sub, d[i+1], up1[i+1])
            let mut sub = self.off[i];
            if sub.abs() > d[i].abs() {
                x.swap(i, i + 1);
                let (r0a, r0b, r0c) = (d[i], up1[i], up2[i]);
                let r1c = if i + 2 < n { up1[i + 1] } else { 0.0 };
                d[i] = sub;
                up1[i] = d[i + 1];
                up2[i] = r1c;
                sub = r0a;
                d[i + 1] = r0b;
                if i + 2 < n {
                    up1[i + 1] = r0c;
                }
            }
            let mut piv = d[i];
            if piv == 0.0 {
                piv = f64::MIN_POSITIVE;
            }
            let m = sub / piv;
            d[i + 1] -= m * up1[i];
            if i + 2 < n {
                up1[i + 1] -= m * up2[i];
            }
            x[i + 1] -= m * x[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= up1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= up2[i] * x[i + 2];
            }
            let mut piv = d[i];
            if piv == 0.0 {
                piv = f64::MIN_POSITIVE;
            }
            x[i] = v / piv;
        }
        x
    }

    /// Inverse iteration at `shift`, optionally deflating a known
    /// eigenvector. Returns `(rayleigh_quotient, eigenvector, residual)`.
    pub fn inverse_iteration(
        &self,
        shift: f64,
        deflate: Option<&[f64]>,
        iters: usize,
    ) -> (f64, Vec<f64>, f64) {
        let n = self.n();
        let mut x: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -0.5 } / (i + 1) as f64)
            .collect();
        if let Some(v0) = deflate {
            project_off(&mut x, v0);
        }
        normalize(&mut x);
        for _ in 0..iters {
            let mut y = self.solve_shifted(shift, &x);
            if let Some(v0) = deflate {
                project_off(&mut y, v0);
            }
            if !normalize(&mut y) {
                break;
            }
            x = y;
        }
        let mut tx = vec![0.0; n];
        self.matvec(&x, &mut tx);
        let lambda: f64 = dot(&x, &tx);
        let residual = tx
            .iter()
            .zip(&x)
            .map(|(t, xi)| (t - lambda * xi) * (t - lambda * xi))
            .sum::<f64>()
            .sqrt();
        (lambda, x, residual)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize(x: &mut [f64]) -> bool {
    let n = dot(x, x).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

pub(crate) fn project_off(x: &mut [f64], v0: &[f64]) {
    let c = dot(x, v0);
    for (xi, vi) in x.iter_mut().zip(v0) {
        *xi -= c * vi;
    }
}

/// Smallest nonzero eigenpair of a sparse symmetric PSD operator whose
/// kernel is spanned by the (normalized) `kernel` vector.
///
/// Inverse power iteration; each solve runs Jacobi-preconditioned CG
/// restricted to the complement of the kernel.
pub fn deflated_smallest_eigenpair(
    apply: &dyn Fn(&[f64], &mut [f64]),
    jacobi: &[f64],
    kernel: &[f64],
    tol: f64,
    max_outer: usize,
) -> Result<(f64, Vec<f64>, f64)> {
    let n = kernel.len();
    let mut x: Vec<f64> = (0..n)
        .map(|i| ((i * 2654435761usize) % 1000) as f64 / 1000.0 - 0.5)
        .collect();
    project_off(&mut x, kernel);
    if !normalize(&mut x) {
        return Err(Error::solver("deflation left no residual direction"));
    }
    let mut lambda_prev = f64::INFINITY;
    let mut work = vec![0.0; n];
    for outer in 0..max_outer {
        let y = pcg_solve(apply, jacobi, kernel, &x, 4000, 1e-12)?;
        x = y;
        project_off(&mut x, kernel);
        if !normalize(&mut x) {
            return Err(Error::solver("inverse iteration collapsed onto the kernel"));
        }
        apply(&x, &mut work);
        let lambda = dot(&x, &work);
        let residual = work
            .iter()
            .zip(&x)
            .map(|(t, xi)| (t - lambda * xi) * (t - lambda * xi))
            .sum::<f64>()
            .sqrt();
        let scale = lambda.abs().max(f64::MIN_POSITIVE);
        let stagnated = (lambda_prev - lambda).abs() <= 1e-13 * scale && residual <= 1e-6 * scale;
        if residual <= tol * scale || stagnated {
            return Ok((lambda, x, residual));
        }
        lambda_prev = lambda;
        if outer == max_outer - 1 {
            return Err(Error::Solver(format!(
                "eigensolver did not converge in {max_outer} iterations (residual {residual:.3e})"
            )));
        }
    }
    unreachable!()
}

/// Jacobi-PCG for `A x = b` on the orthogonal complement of `kernel`.
fn pcg_solve(
    apply: &dyn Fn(&[f64], &mut [f64]),
    jacobi: &[f64],
    kernel: &[f64],
    b: &[f64],
    max_iter: usize,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let n = b.len();
    let mut b = b.to_vec();
    project_off(&mut b, kernel);
    let bnorm = dot(&b, &b).sqrt().max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(jacobi).map(|(ri, d)| ri / d).collect();
    project_off(&mut z, kernel);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        project_off(&mut ap, kernel);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break; // operator numerically singular along p; accept current x
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / jacobi[i];
        }
        project_off(&mut z, kernel);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(x) // inverse iteration tolerates an inexact solve
}

/// Eigenvalues of a symmetric 2x2 matrix `[[a, b], [b, c]]`, ascending.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    (0.5 * (tr - disc), 0.5 * (tr + disc))
}
