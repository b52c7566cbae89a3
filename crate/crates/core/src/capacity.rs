//! Relative fractional capacity as an obstacle-constrained quadratic program.
//!
//! `cap(Σ; Ω) = min { uᵀAu : u ≥ 1 on Σ, u = 0 off Ω }` is solved by a
//! primal–dual active set iteration: the obstacle is imposed exactly on the
//! current active set, the remaining unknowns solve the reduced linear
//! system, and the active set is updated from the multipliers `(Au)_Σ`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gagliardo::{FractionalOrder, GridFunction, GridOperator, NonlocalForm, Operator1d};
use crate::geometry::{project, Direction, Point, RasterDomain};
use crate::linalg::{pcg, DenseCholesky, SymmetricOperator};
use crate::scalar::{lit, Real};

/// Solver controls shared by all capacity computations.
#[derive(Clone, Copy, Debug)]
pub struct CapacityOptions {
    /// Relative residual of the inner linear solves.
    pub tol: f64,
    pub max_cg: usize,
    pub max_active_set: usize,
    /// Reduced systems up to this size are factorised densely.
    pub dense_limit: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_cg: 20_000, max_active_set: 50, dense_limit: 1024 }
    }
}

/// Minimiser of the obstacle problem in the operator's own ordering.
#[derive(Clone, Debug)]
pub struct ObstacleSolution<T> {
    pub value: T,
    pub x: Vec<T>,
    pub kkt_residual: T,
    /// Positions (operator ordering) where `u = 1` binds.
    pub active: Vec<usize>,
    pub iterations: usize,
}

/// Capacity value with its minimiser on the grid.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult<T> {
    pub value: T,
    #[serde(skip)]
    pub minimizer: GridFunction<T>,
    pub kkt_residual: T,
    /// Grid indices of nodes where the constraint binds.
    pub active_set: Vec<usize>,
    pub iterations: usize,
}

fn reduced_solve<T: Real, A: SymmetricOperator<T> + ?Sized>(
    op: &A,
    free: &[usize],
    rhs: &[T],
    dense: Option<&[T]>,
    opts: &CapacityOptions,
) -> Result<Vec<T>> {
    let n = op.dim();
    let m = free.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if let Some(full) = dense {
        let mut a = vec![T::zero(); m * m];
        for (p, &i) in free.iter().enumerate() {
            for (q, &j) in free.iter().enumerate() {
                a[p * m + q] = full[i * n + j];
            }
        }
        let chol = DenseCholesky::new(m, &a)?;
        return Ok(chol.solve(rhs));
    }
    let diag_full = op.diag();
    let diag: Vec<T> = free.iter().map(|&i| diag_full[i]).collect();
    let mut buf_in = vec![T::zero(); n];
    let mut buf_out = vec![T::zero(); n];
    let mv = |x: &[T], y: &mut [T]| {
        buf_in.iter_mut().for_each(|v| *v = T::zero());
        for (&i, &v) in free.iter().zip(x) {
            buf_in[i] = v;
        }
        op.apply(&buf_in, &mut buf_out);
        for (yi, &i) in y.iter_mut().zip(free) {
            *yi = buf_out[i];
        }
    };
    let mut x = vec![T::zero(); m];
    let rep = pcg(mv, &diag, rhs, &mut x, lit(opts.tol), opts.max_cg);
    if rep.indefinite || rep.residual > lit(opts.tol.max(1e-14) * 10.0) {
        return Err(Error::NonConvergence {
            what: "capacity inner solve",
            iterations: rep.iterations,
            residual: rep.residual.to_f64_(),
        });
    }
    Ok(x)
}

/// Solves `min xᵀAx` subject to `x ≥ 1` on `sigma` (operator positions).
pub fn obstacle_solve<T: Real, A: SymmetricOperator<T> + ?Sized>(op: &A, sigma: &[usize], opts: &CapacityOptions) -> Result<ObstacleSolution<T>> {
    let n = op.dim();
    if sigma.is_empty() {
        return Ok(ObstacleSolution {
            value: T::zero(),
            x: vec![T::zero(); n],
            kkt_residual: T::zero(),
            active: Vec::new(),
            iterations: 0,
        });
    }
    if let Some(&bad) = sigma.iter().find(|&&i| i >= n) {
        return Err(Error::Precondition(format!("obstacle index {bad} outside the unknowns")));
    }
    let dense = if n <= opts.dense_limit { Some(op.to_dense()) } else { None };
    let diag = op.diag();
    let c = diag.iter().copied().fold(T::zero(), T::max);
    let mut in_sigma = vec![false; n];
    for &i in sigma {
        in_sigma[i] = true;
    }
    let mut active: Vec<bool> = in_sigma.clone();
    let mut x = vec![T::zero(); n];
    let mut g = vec![T::zero(); n];
    for it in 1..=opts.max_active_set {
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let ones: Vec<T> = (0..n).map(|i| if active[i] { T::one() } else { T::zero() }).collect();
        op.apply(&ones, &mut g);
        let rhs: Vec<T> = free.iter().map(|&i| -g[i]).collect();
        let xf = reduced_solve(op, &free, &rhs, dense.as_deref(), opts)?;
        x.copy_from_slice(&ones);
        for (&i, &v) in free.iter().zip(&xf) {
            x[i] = v;
        }
        op.apply(&x, &mut g);
        let next: Vec<bool> = (0..n)
            .map(|i| {
                if !in_sigma[i] {
                    return false;
                }
                let mu = if active[i] { g[i] } else { T::zero() };
                mu + c * (T::one() - x[i]) > T::zero()
            })
            .collect();
        if next == active {
            let mut kkt = T::zero();
            for i in 0..n {
                let r = if active[i] {
                    (-g[i]).max(T::zero())
                } else if in_sigma[i] {
                    ((T::one() - x[i]) * c).max(g[i].abs())
                } else {
                    g[i].abs()
                };
                kkt = kkt.max(r);
            }
            let value = op.quadratic(&x);
            return Ok(ObstacleSolution {
                value,
                kkt_residual: kkt / c.max(T::min_positive_value()),
                active: (0..n).filter(|&i| active[i]).collect(),
                x,
                iterations: it,
            });
        }
        active = next;
    }
    Err(Error::NonConvergence {
        what: "active set iteration",
        iterations: opts.max_active_set,
        residual: f64::NAN,
    })
}

/// `cap(Σ; Ω)` on a grid: `sigma` and `omega` are node masks over the
/// operator's grid, with `Σ ⊆ Ω`.
pub fn capacity<T: Real>(
    op: Arc<GridOperator<T>>,
    sigma: &[bool],
    omega: &[bool],
    opts: &CapacityOptions,
) -> Result<CapacityResult<T>> {
    let n = op.nx * op.ny;
    if sigma.len() != n || omega.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len().min(omega.len()) });
    }
    if sigma.iter().zip(omega).any(|(&a, &b)| a && !b) {
        return Err(Error::Precondition("Σ must lie inside Ω".into()));
    }
    let form = NonlocalForm::full(op, omega)?;
    let pos: Vec<usize> = form.active.iter().enumerate().filter(|(_, &k)| sigma[k]).map(|(p, _)| p).collect();
    let sol = obstacle_solve(&form, &pos, opts)?;
    Ok(CapacityResult {
        value: sol.value,
        minimizer: form.scatter(&sol.x),
        kkt_residual: sol.kkt_residual,
        active_set: sol.active.iter().map(|&p| form.active[p]).collect(),
        iterations: sol.iterations,
    })
}

/// Capacity of the node nearest to `x0` relative to `(a, b)` on a mesh
/// with `nodes` interior points.
pub fn point_capacity_1d<T: Real>(x0: T, a: T, b: T, s: T, nodes: usize, opts: &CapacityOptions) -> Result<T> {
    let order = FractionalOrder::above_half(s)?;
    if !(a < x0 && x0 < b) {
        return Err(Error::Precondition("need a < x0 < b".into()));
    }
    let op: Operator1d<T> = crate::gagliardo::assemble_1d(a, b, nodes, order)?;
    let idx = ((x0 - a) / op.h).round().to_f64_() as usize;
    let idx = idx.clamp(1, nodes) - 1;
    // the Toeplitz matrix is ill-conditioned as s → 1 and a dense matvec
    // costs as much as a Cholesky row: factorise outright
    let opts = CapacityOptions { dense_limit: opts.dense_limit.max(nodes), ..*opts };
    Ok(obstacle_solve(&op, &[idx], &opts)?.value)
}

/// One instance of the Maz'ya-type Poincaré inequality.
#[derive(Clone, Debug, Serialize)]
pub struct MazyaReport<T> {
    /// `[u]²` over the square (regional form).
    pub lhs: T,
    /// `(s / r^N) cap(Σ; B_R) ‖u‖²`.
    pub rhs_core: T,
    /// `lhs / rhs_core`: the empirical `φ` of this instance; `None` when skipped.
    pub ratio: Option<T>,
    pub capacity: T,
    pub norm2: T,
}

/// Inputs describing the square `Q_r(x0)`, the set `Σ` and the disk `B_R(x0)`.
#[derive(Clone, Debug)]
pub struct MazyaSetup<'a, T: Real> {
    pub op: Arc<GridOperator<T>>,
    pub square: &'a [bool],
    pub sigma: &'a [bool],
    pub disk: &'a [bool],
    pub r: T,
}

/// Evaluates both sides of the Maz'ya inequality for `u` (grid values).
pub fn mazya_check<T: Real>(u: &GridFunction<T>, setup: &MazyaSetup<'_, T>, opts: &CapacityOptions) -> Result<MazyaReport<T>> {
    let op = setup.op.clone();
    let (nx, ny) = (op.nx, op.ny);
    // dist(supp u, Σ) > 0 on the grid: no Σ node or 4-neighbour carries mass
    for k in 0..nx * ny {
        if !setup.sigma[k] {
            continue;
        }
        let (i, j) = ((k % nx) as i64, (k / nx) as i64);
        for (di, dj) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (a, b) = (i + di, j + dj);
            if a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny {
                let q = b as usize * nx + a as usize;
                if u.values[q] != T::zero() {
                    return Err(Error::Precondition("u must vanish in a neighbourhood of Σ".into()));
                }
            }
        }
    }
    let cap = capacity(op, setup.sigma, setup.disk, opts)?.value;
    mazya_report(u, setup, cap)
}

/// As [`mazya_check`] with `cap(Σ; B_R)` already known (no support check).
pub fn mazya_report<T: Real>(u: &GridFunction<T>, setup: &MazyaSetup<'_, T>, cap: T) -> Result<MazyaReport<T>> {
    let sq = NonlocalForm::regional(setup.op.clone(), setup.square)?;
    let x = sq.gather(u)?;
    let lhs = sq.evaluate_vec(&x);
    let norm2 = sq.mass_norm2(&x);
    let s = setup.op.s;
    let rhs_core = s / (setup.r * setup.r) * cap * norm2;
    let ratio = if norm2 == T::zero() || rhs_core == T::zero() { None } else { Some(lhs / rhs_core) };
    Ok(MazyaReport { lhs, rhs_core, ratio, capacity: cap, norm2 })
}

/// Which chord estimate enters the geometric capacity bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordBound {
    /// `(r · dist(Σ, ∂B_r))^{(1-2s)/2}` as stated.
    Stated,
    /// `(2r)^{1-2s}`: every chord is at most a diameter.
    Diameter,
}

/// Geometric lower bound `(m_s/𝒜) · chord factor · ℋ¹(Π_ω Σ)`.
pub fn projection_rhs<T: Real>(m_s: T, a_dir: T, s: T, r: T, dist: T, proj_len: T, chord: ChordBound) -> T {
    let e = T::one() - s - s;
    let factor = match chord {
        ChordBound::Stated => (r * dist).powf(e * lit(0.5)),
        ChordBound::Diameter => (r + r).powf(e),
    };
    m_s / a_dir * factor * proj_len
}

/// Report of the projection capacity bound on a disk.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionBoundReport<T> {
    pub capacity: T,
    pub projection_length: T,
    pub dist_to_boundary: T,
    pub rhs_stated: T,
    pub rhs_diameter: T,
    pub holds_stated: bool,
    pub holds_diameter: bool,
}

/// Compares `cap(Σ; B_r(c))` with the geometric projection bound.
///
/// `disk` must be the node mask of `B_r(c)` on `dom`'s grid; `sigma` the
/// node mask of `Σ`.
#[allow(clippy::too_many_arguments)]
pub fn projection_bound_check<T: Real>(
    dom: &RasterDomain<T>,
    disk: &[bool],
    center: Point<T>,
    r: T,
    sigma: &[bool],
    s: FractionalOrder<T>,
    dir: Direction<T>,
    m_s: T,
    a_dir: T,
    opts: &CapacityOptions,
) -> Result<ProjectionBoundReport<T>> {
    if !s.s.gt(&lit(0.5)) {
        return Err(Error::InvalidOrder(s.s.to_f64_(), "s must exceed 1/2"));
    }
    let nodes: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k]).collect();
    if nodes.is_empty() {
        return Err(Error::EmptySet("Σ has no node"));
    }
    let far = nodes
        .iter()
        .map(|&k| {
            let (i, j) = dom.coords(k);
            dom.node_point(i, j).dist(center)
        })
        .fold(T::zero(), T::max);
    let dist = r - far;
    if !(dist > T::zero()) {
        return Err(Error::Precondition("Σ must be compactly contained in the disk".into()));
    }
    let op = GridOperator::for_domain(dom, s);
    let cap = capacity(op, sigma, disk, opts)?.value;
    let proj = project(dom, &nodes, dir).length;
    let rhs_stated = projection_rhs(m_s, a_dir, s.s, r, dist, proj, ChordBound::Stated);
    let rhs_diameter = projection_rhs(m_s, a_dir, s.s, r, dist, proj, ChordBound::Diameter);
    Ok(ProjectionBoundReport {
        capacity: cap,
        projection_length: proj,
        dist_to_boundary: dist,
        rhs_stated,
        rhs_diameter,
        holds_stated: cap >= rhs_stated,
        holds_diameter: cap >= rhs_diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Tridiag(usize);

    impl SymmetricOperator<f64> for Tridiag {
        fn dim(&self) -> usize {
            self.0
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..self.0 {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < self.0 { x[i + 1] } else { 0.0 };
                y[i] = 2.0 * x[i] - l - r;
            }
        }
        fn diag(&self) -> Vec<f64> {
            vec![2.0; self.0]
        }
        fn to_dense(&self) -> Vec<f64> {
            let n = self.0;
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                a[i * n + i] = 2.0;
                if i > 0 {
                    a[i * n + i - 1] = -1.0;
                    a[(i - 1) * n + i] = -1.0;
                }
            }
            a
        }
    }

    #[test]
    fn discrete_laplacian_point_capacity() {
        // the minimiser is the tent rising over 5 steps on each side: 10 · (1/5)²
        let op = Tridiag(9);
        for dense_limit in [0, 100] {
            let opts = CapacityOptions { dense_limit, ..Default::default() };
            let sol = obstacle_solve(&op, &[4], &opts).unwrap();
            assert!((sol.value - 0.4).abs() < 1e-12, "{}", sol.value);
            assert!(sol.x.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        }
    }
}
