//! Quadratic forms `uᵀAu ≈ [u]²` on raster grids.
//!
//! The full form on an active node set `S` is the infinite Toeplitz matrix
//! `W(i - j)` restricted to `S × S`; because the stencil is the exact
//! full-space interaction of the nodal basis, it already contains every
//! interaction with `ℝ² \ S`. Writing `c_ij = -W(i - j) ≥ 0` (off-diagonal
//! couplings) and `e_i = (W * 1_S)_i = Σ_{j ∉ S} c_ij` gives the split
//!
//! ```text
//! uᵀ W_SS u = ½ Σ_{i,j ∈ S} c_ij (u_i - u_j)² + Σ_{i ∈ S} e_i u_i²
//! ```
//!
//! into a regional part (interactions inside `S` only) and an exterior
//! diagonal. Regional forms on a node set `E` keep only the first term.

use std::sync::Arc;

use rayon::prelude::*;

use super::conv::Convolver;
use super::stencil::{Stencil1, Stencil2};
use super::{FractionalOrder, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::RasterDomain;
use crate::linalg::SymmetricOperator;
use crate::quadrature::compensated_sum;
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// Stencil table and FFT convolver for one `(s, h, nx, ny)` grid.
#[derive(Debug)]
pub struct GridOperator<T: Real> {
    pub s: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    /// `W(|d1|, |d2|)` at `[d2·nx + d1]`, already scaled by `h^{2-2s}`.
    weights: Vec<T>,
    conv: Convolver<T>,
}

impl<T: Real> GridOperator<T> {
    pub fn new(s: FractionalOrder<T>, h: T, nx: usize, ny: usize) -> Arc<Self> {
        let st = Stencil2::new(s.s.to_f64_(), h.to_f64_(), nx, ny);
        Self::from_stencil(&st)
    }

    pub fn from_stencil(st: &Stencil2) -> Arc<Self> {
        let weights: Vec<T> = st.w.iter().map(|&w| T::lit(w)).collect();
        let (nx, ny) = (st.nx, st.ny);
        let conv = Convolver::new(nx, ny, |a, b| weights[b * nx + a]);
        Arc::new(Self { s: T::lit(st.s), h: T::lit(st.h), nx, ny, weights, conv })
    }

    pub fn for_domain(dom: &RasterDomain<T>, s: FractionalOrder<T>) -> Arc<Self> {
        Self::new(s, dom.h, dom.nx, dom.ny)
    }

    #[inline]
    pub fn weight(&self, d1: usize, d2: usize) -> T {
        self.weights[d2 * self.nx + d1]
    }

    /// Coupling `c(d) = -W(d)` for a nonzero displacement.
    pub fn coupling(&self, d1: usize, d2: usize) -> T {
        -self.weight(d1, d2)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `W * x` on the whole grid.
    pub fn convolve(&self, x: &[T], y: &mut [T]) {
        self.conv.apply(x, y)
    }

    /// Lumped mass per node.
    pub fn mass(&self) -> T {
        self.h * self.h
    }
}

/// Symmetric positive semidefinite form on an active node set.
#[derive(Clone, Debug)]
pub struct NonlocalForm<T: Real> {
    op: Arc<GridOperator<T>>,
    /// Grid indices of active nodes, increasing.
    pub active: Vec<usize>,
    slot: Vec<usize>,
    /// `e_i = (W * 1_S)_i` for each active node.
    pub exterior_diag: Vec<T>,
    /// Regional form: drop the exterior diagonal.
    pub regional: bool,
}

impl<T: Real> NonlocalForm<T> {
    fn build(op: Arc<GridOperator<T>>, mask: &[bool], regional: bool) -> Result<Self> {
        let n = op.nx * op.ny;
        if mask.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mask.len() });
        }
        let active: Vec<usize> = (0..n).filter(|&k| mask[k]).collect();
        let mut slot = vec![NONE; n];
        for (p, &k) in active.iter().enumerate() {
            slot[k] = p;
        }
        let ind: Vec<T> = mask.iter().map(|&b| if b { T::one() } else { T::zero() }).collect();
        let mut conv = vec![T::zero(); n];
        op.convolve(&ind, &mut conv);
        let exterior_diag = active.iter().map(|&k| conv[k]).collect();
        Ok(Self { op, active, slot, exterior_diag, regional })
    }

    /// `[u]²_{W^{s,2}(ℝ²)}` for grid functions supported on `mask`.
    pub fn full(op: Arc<GridOperator<T>>, mask: &[bool]) -> Result<Self> {
        Self::build(op, mask, false)
    }

    /// `½ Σ_{i,j ∈ E} c_ij (u_i - u_j)²`, the discrete `[u]²_{W^{s,2}(E)}`.
    pub fn regional(op: Arc<GridOperator<T>>, region: &[bool]) -> Result<Self> {
        Self::build(op, region, true)
    }

    pub fn operator(&self) -> &Arc<GridOperator<T>> {
        &self.op
    }

    pub fn s(&self) -> T {
        self.op.s
    }

    pub fn h(&self) -> T {
        self.op.h
    }

    pub fn mass(&self) -> T {
        self.op.mass()
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.op.nx, self.op.ny)
    }

    /// Position of a grid node in the active vector.
    pub fn slot(&self, grid_index: usize) -> Option<usize> {
        match self.slot.get(grid_index) {
            Some(&p) if p != NONE => Some(p),
            _ => None,
        }
    }

    pub fn active_mask(&self) -> Vec<bool> {
        self.slot.iter().map(|&p| p != NONE).collect()
    }

    pub fn gather(&self, u: &GridFunction<T>) -> Result<Vec<T>> {
        let n = self.op.nx * self.op.ny;
        if u.values.len() != n || u.nx != self.op.nx {
            return Err(Error::DimensionMismatch { expected: n, got: u.values.len() });
        }
        Ok(self.active.iter().map(|&k| u.values[k]).collect())
    }

    pub fn scatter(&self, x: &[T]) -> GridFunction<T> {
        let mut g = GridFunction::zeros(self.op.nx, self.op.ny);
        for (&k, &v) in self.active.iter().zip(x) {
            g.values[k] = v;
        }
        g
    }

    #[inline]
    fn entry(&self, p: usize, q: usize) -> T {
        let (nx, _) = self.grid_dims();
        let (a, b) = (self.active[p], self.active[q]);
        let d1 = (a % nx).abs_diff(b % nx);
        let d2 = (a / nx).abs_diff(b / nx);
        let w = self.op.weight(d1, d2);
        if p == q && self.regional {
            w - self.exterior_diag[p]
        } else {
            w
        }
    }

    /// Diagonal of the matrix.
    pub fn diagonal(&self) -> Vec<T> {
        let w0 = self.op.weight(0, 0);
        if self.regional {
            self.exterior_diag.iter().map(|&e| w0 - e).collect()
        } else {
            vec![w0; self.len()]
        }
    }

    /// `y = A x` via FFT convolution.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        let n = self.op.nx * self.op.ny;
        let mut g = vec![T::zero(); n];
        for (&k, &v) in self.active.iter().zip(x) {
            g[k] = v;
        }
        let mut out = vec![T::zero(); n];
        self.op.convolve(&g, &mut out);
        for (p, &k) in self.active.iter().enumerate() {
            y[p] = out[k];
            if self.regional {
                y[p] = y[p] - self.exterior_diag[p] * x[p];
            }
        }
    }

    /// `xᵀ A x` by direct summation; rows in parallel, reduced in a fixed order.
    pub fn evaluate_vec(&self, x: &[T]) -> T {
        let n = self.len();
        let rows: Vec<T> = (0..n)
            .into_par_iter()
            .map(|p| {
                if x[p] == T::zero() {
                    return T::zero();
                }
                let mut acc = T::zero();
                for q in 0..n {
                    if x[q] != T::zero() {
                        acc = acc + self.entry(p, q) * x[q];
                    }
                }
                acc * x[p]
            })
            .collect();
        compensated_sum(rows)
    }

    pub fn evaluate(&self, u: &GridFunction<T>) -> Result<T> {
        let x = self.gather(u)?;
        Ok(self.evaluate_vec(&x))
    }

    /// Dense row-major matrix.
    pub fn dense(&self) -> Vec<T> {
        let n = self.len();
        let mut a = vec![T::zero(); n * n];
        a.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
            for (q, r) in row.iter_mut().enumerate() {
                *r = self.entry(p, q);
            }
        });
        a
    }

    /// `‖x‖²` under the lumped mass.
    pub fn mass_norm2(&self, x: &[T]) -> T {
        self.mass() * compensated_sum(x.iter().map(|&v| v * v))
    }
}

/// Full form for the domain's mask (punctures kept active).
pub fn assemble_2d<T: Real>(dom: &RasterDomain<T>, s: FractionalOrder<T>, region: Option<&[bool]>) -> Result<NonlocalForm<T>> {
    let op = GridOperator::for_domain(dom, s);
    match region {
        None => NonlocalForm::full(op, &dom.mask),
        Some(r) => NonlocalForm::regional(op, r),
    }
}

/// Mass-weighted mean of `u` over the node set `E`.
pub fn average<T: Real>(u: &GridFunction<T>, region: &[bool]) -> Result<T> {
    let mut n = 0usize;
    let vals = u.values.iter().zip(region).filter(|(_, &m)| m).map(|(&v, _)| {
        n += 1;
        v
    });
    let total = compensated_sum(vals.collect::<Vec<_>>());
    if n == 0 {
        return Err(Error::EmptySet("average over an empty node set"));
    }
    Ok(total / T::from_usize_(n))
}

/// Uniform 1D mesh on `(a, b)` with `n` interior nodes and the exact Toeplitz form.
#[derive(Clone, Debug)]
pub struct Operator1d<T: Real> {
    pub s: T,
    pub a: T,
    pub b: T,
    pub n: usize,
    pub h: T,
    /// `W(d)` for `0 ≤ d < n`, scaled by `h^{1-2s}`.
    pub weights: Vec<T>,
}

impl<T: Real> Operator1d<T> {
    pub fn node(&self, i: usize) -> T {
        self.a + self.h * T::from_usize_(i + 1)
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.weights[i.abs_diff(j)]
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let rows: Vec<T> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut acc = T::zero();
                for (j, &xj) in x.iter().enumerate() {
                    acc = acc + self.entry(i, j) * xj;
                }
                acc * x[i]
            })
            .collect();
        Ok(compensated_sum(rows))
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut acc = T::zero();
            for (j, &xj) in x.iter().enumerate() {
                acc = acc + self.entry(i, j) * xj;
            }
            *yi = acc;
        });
    }

    pub fn dense(&self) -> Vec<T> {
        let n = self.n;
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.entry(i, j);
            }
        }
        m
    }

    /// Continuum exterior kernel `κ(x) = ∫_{ℝ∖(a,b)} |x-y|^{-1-2s} dy`.
    pub fn exterior_kappa(&self, x: T) -> T {
        let two_s = self.s + self.s;
        ((x - self.a).powf(-two_s) + (self.b - x).powf(-two_s)) / two_s
    }
}

/// Exact form for piecewise-linear functions with `n` interior nodes on `(a, b)`.
pub fn assemble_1d<T: Real>(a: T, b: T, n: usize, s: FractionalOrder<T>) -> Result<Operator1d<T>> {
    if !(b > a) || n == 0 {
        return Err(Error::Precondition("need a < b and at least one node".into()));
    }
    let h = (b - a) / T::from_usize_(n + 1);
    let st = Stencil1::new(s.s.to_f64_(), h.to_f64_(), n);
    Ok(Operator1d {
        s: s.s,
        a,
        b,
        n,
        h,
        weights: st.w.iter().map(|&w| T::lit(w)).collect(),
    })
}

impl<T: Real> SymmetricOperator<T> for NonlocalForm<T> {
    fn dim(&self) -> usize {
        self.len()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matvec(x, y)
    }
    fn diag(&self) -> Vec<T> {
        self.diagonal()
    }
    fn to_dense(&self) -> Vec<T> {
        self.dense()
    }
    fn quadratic(&self, x: &[T]) -> T {
        self.evaluate_vec(x)
    }
}

impl<T: Real> SymmetricOperator<T> for Operator1d<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matvec(x, y)
    }
    fn diag(&self) -> Vec<T> {
        vec![self.weights[0]; self.n]
    }
    fn to_dense(&self) -> Vec<T> {
        self.dense()
    }
    fn quadratic(&self, x: &[T]) -> T {
        self.evaluate(x).expect("length checked by caller")
    }
}
