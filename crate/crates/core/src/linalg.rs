//! Small dense and matrix-free linear algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::compensated_sum;
use crate::scalar::Real;

/// Symmetric matrix available through products, its diagonal and, for small
/// sizes, a dense copy.
pub trait SymmetricOperator<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn diag(&self) -> Vec<T>;
    /// Row-major dense matrix.
    fn to_dense(&self) -> Vec<T>;
    /// `xᵀ A x` in a reproducible summation order.
    fn quadratic(&self, x: &[T]) -> T {
        let mut y = vec![T::zero(); x.len()];
        self.apply(x, &mut y);
        dot(x, &y)
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn scale<T: Real>(alpha: T, x: &mut [T]) {
    for v in x.iter_mut() {
        *v = *v * alpha;
    }
}

/// Outcome of a conjugate gradient solve.
#[derive(Clone, Copy, Debug)]
pub struct CgReport<T> {
    pub iterations: usize,
    pub residual: T,
    /// Set when a direction with `pᵀAp ≤ 0` was met.
    pub indefinite: bool,
}

/// Jacobi-preconditioned CG for `A x = b`; `x` holds the initial guess.
/// Stops when `‖r‖ ≤ tol ‖b‖`.
pub fn pcg<T: Real, F: FnMut(&[T], &mut [T])>(
    mut matvec: F,
    diag: &[T],
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> CgReport<T> {
    let n = b.len();
    let bn = norm(b);
    if bn == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return CgReport { iterations: 0, residual: T::zero(), indefinite: false };
    }
    let mut ax = vec![T::zero(); n];
    matvec(x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let inv: Vec<T> = diag
        .iter()
        .map(|&d| if d > T::zero() { d.recip() } else { T::one() })
        .collect();
    let mut z: Vec<T> = r.iter().zip(&inv).map(|(&a, &b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut res = norm(&r) / bn;
    for it in 0..max_iter {
        if res <= tol {
            return CgReport { iterations: it, residual: res, indefinite: false };
        }
        matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return CgReport { iterations: it, residual: res, indefinite: true };
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm(&r) / bn;
    }
    CgReport { iterations: max_iter, residual: res, indefinite: false }
}

/// Cholesky factor of a dense symmetric positive definite matrix (row-major),
/// factorised in `f64` whatever the working scalar.
pub struct DenseCholesky {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl DenseCholesky {
    pub fn new<T: Real>(n: usize, a: &[T]) -> Result<Self> {
        let m = DMatrix::from_iterator(n, n, a.iter().map(|v| v.to_f64_()));
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::Precondition("matrix is not positive definite".into()))?;
        Ok(Self { chol })
    }

    pub fn solve<T: Real>(&self, b: &[T]) -> Vec<T> {
        let v = DVector::from_iterator(b.len(), b.iter().map(|v| v.to_f64_()));
        self.chol.solve(&v).iter().map(|&x| T::lit(x)).collect()
    }
}

/// Eigenvalues of a dense symmetric matrix (row-major), ascending.
pub fn dense_eigenvalues<T: Real>(n: usize, a: &[T]) -> Vec<f64> {
    let m = DMatrix::from_iterator(n, n, a.iter().map(|v| v.to_f64_()));
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|x, y| x.partial_cmp(y).unwrap());
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcg_solves_spd_system() {
        let n: usize = 30;
        let a: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    4.0
                } else if i.abs_diff(j) == 1 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mv = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            }
        };
        let mut x = vec![0.0; n];
        let rep = pcg(mv, &vec![4.0; n], &b, &mut x, 1e-12, 200);
        assert!(rep.residual <= 1e-12);
        let chol = DenseCholesky::new(n, &a).unwrap();
        let y = chol.solve(&b);
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }
}
