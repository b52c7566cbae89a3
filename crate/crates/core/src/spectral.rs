//! First Dirichlet eigenvalue of the discrete fractional Laplacian, analytic
//! Rayleigh-quotient upper bounds and the standard experiments.

use serde::{Deserialize, Serialize};

use crate::constants::{alpha, zeta_seminorm};
use crate::error::{Error, Result};
use crate::gagliardo::{
    seminorm_1d, seminorm_tensor_2d, tensor_norm2, FractionalOrder, GridFunction, GridOperator, NonlocalForm, Profile,
};
use crate::geometry::RasterDomain;
use crate::linalg::{dot, norm, pcg, scale, DenseCholesky, SymmetricOperator};
use crate::quadrature::{adaptive, AdaptiveOptions};
use crate::scalar::{lit, Real};

/// Controls for [`smallest_eigenvalue`].
#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Target for `‖Au - λMu‖ / (λ ‖Mu‖)`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_cg: usize,
    /// Problems up to this size are factorised densely.
    pub dense_limit: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_outer: 500, max_cg: 20_000, dense_limit: 1024 }
    }
}

/// Ground state of `A u = λ M u` with lumped mass `M = h² I`.
#[derive(Clone, Debug, Serialize)]
pub struct EigResult<T> {
    pub lambda: T,
    #[serde(skip)]
    pub vector: GridFunction<T>,
    pub iterations: usize,
    pub residual: T,
    pub unknowns: usize,
}

enum Inner {
    Dense(DenseCholesky),
    Cg,
}

/// Smallest generalised eigenvalue by (shifted) inverse iteration.
pub fn smallest_eigenvalue<T: Real>(form: &NonlocalForm<T>, opts: &EigOptions) -> Result<EigResult<T>> {
    let n = form.len();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let mass = form.mass();
    let tol: T = lit(opts.tol);
    let inner = if n <= opts.dense_limit {
        Inner::Dense(DenseCholesky::new(n, &form.dense())?)
    } else {
        Inner::Cg
    };
    let diag = form.diagonal();
    let mut x = vec![T::one(); n];
    let nx = norm(&x);
    scale(nx.recip(), &mut x);
    let mut ax = vec![T::zero(); n];
    let mut rho = T::zero();
    let mut sigma = T::zero();
    let mut checkpoint = T::infinity();
    for it in 1..=opts.max_outer {
        form.matvec(&x, &mut ax);
        let rq = dot(&x, &ax);
        let r: Vec<T> = ax.iter().zip(&x).map(|(&a, &b)| a - rq * b).collect();
        let residual = norm(&r) / rq.abs().max(T::min_positive_value());
        let prev = rho;
        rho = rq;
        if residual <= tol {
            return Ok(finish(form, x, rho / mass, it, residual));
        }
        if it % 40 == 0 {
            // less than a decade per 40 steps: hand over to the block solver
            if residual > checkpoint * lit(0.1) {
                break;
            }
            checkpoint = residual;
        }
        let y = match &inner {
            Inner::Dense(ch) => ch.solve(&x),
            Inner::Cg => {
                if sigma == T::zero() && prev > T::zero() && ((rho - prev) / rho).abs() < lit(1e-3) {
                    sigma = rho * lit(0.95);
                }
                let cg_tol = (residual * lit(1e-2)).min(lit(1e-6)).max(tol * lit(1e-3));
                let mut y = x.clone();
                let shifted = |v: &[T], out: &mut [T]| {
                    form.matvec(v, out);
                    if sigma != T::zero() {
                        for (o, &vi) in out.iter_mut().zip(v) {
                            *o = *o - sigma * vi;
                        }
                    }
                };
                let d: Vec<T> = diag.iter().map(|&v| v - sigma).collect();
                let rep = pcg(shifted, &d, &x, &mut y, cg_tol, opts.max_cg);
                if rep.indefinite {
                    // shift overshot the ground state: retreat to plain inverse iteration
                    sigma = T::zero();
                    let mut y = x.clone();
                    let rep = pcg(|v: &[T], out: &mut [T]| form.matvec(v, out), &diag, &x, &mut y, cg_tol, opts.max_cg);
                    if rep.indefinite || rep.residual > cg_tol * lit(10.0) {
                        return Err(Error::NonConvergence { what: "eigen inner solve", iterations: it, residual: rep.residual.to_f64_() });
                    }
                    y
                } else if rep.residual > cg_tol * lit(10.0) {
                    return Err(Error::NonConvergence { what: "eigen inner solve", iterations: it, residual: rep.residual.to_f64_() });
                } else {
                    y
                }
            }
        };
        let ny = norm(&y);
        x = y.into_iter().map(|v| v / ny).collect();
    }
    // a tight cluster at the bottom of the spectrum stalls single-vector
    // iteration; a Ritz block converges at the rate λ₁/λ_{b+1} instead
    block_inverse_iteration(form, &inner, &diag, x, opts)
}

const BLOCK: usize = 8;

fn block_inverse_iteration<T: Real>(
    form: &NonlocalForm<T>,
    inner: &Inner,
    diag: &[T],
    x0: Vec<T>,
    opts: &EigOptions,
) -> Result<EigResult<T>> {
    let n = form.len();
    let b = BLOCK.min(n);
    let tol: T = lit(opts.tol);
    let mass = form.mass();
    // deterministic start: the stalled iterate plus smooth oscillations
    let mut v: Vec<Vec<T>> = vec![x0];
    for m in 1..b {
        let f = lit::<T>(m as f64 * 0.618_033_988_75);
        v.push((0..n).map(|i| (lit::<T>(i as f64 + 1.0) * f).sin()).collect());
    }
    let solve = |rhs: &[T]| -> Result<Vec<T>> {
        match inner {
            Inner::Dense(ch) => Ok(ch.solve(rhs)),
            Inner::Cg => {
                let mut y = rhs.to_vec();
                let cg_tol: T = (tol * lit(1e-2)).max(lit(1e-12));
                let rep = pcg(|a: &[T], out: &mut [T]| form.matvec(a, out), diag, rhs, &mut y, cg_tol, opts.max_cg);
                if rep.indefinite || rep.residual > cg_tol * lit(10.0) {
                    return Err(Error::NonConvergence { what: "eigen inner solve", iterations: rep.iterations, residual: rep.residual.to_f64_() });
                }
                Ok(y)
            }
        }
    };
    let mut residual = T::infinity();
    let mut prev_rq = T::infinity();
    for it in 1..=opts.max_outer {
        let mut w: Vec<Vec<T>> = v.iter().map(|c| solve(c)).collect::<Result<_>>()?;
        orthonormalise(&mut w);
        let b = w.len();
        let aw: Vec<Vec<T>> = w
            .iter()
            .map(|c| {
                let mut o = vec![T::zero(); n];
                form.matvec(c, &mut o);
                o
            })
            .collect();
        let h = nalgebra::DMatrix::<f64>::from_fn(b, b, |i, j| 0.5 * (dot(&w[i], &aw[j]) + dot(&w[j], &aw[i])).to_f64_());
        let eig = nalgebra::SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let combine = |basis: &[Vec<T>], col: usize| -> Vec<T> {
            let mut out = vec![T::zero(); n];
            for (k, c) in basis.iter().enumerate() {
                let q = lit::<T>(eig.eigenvectors[(k, col)]);
                for (o, &ci) in out.iter_mut().zip(c) {
                    *o = *o + q * ci;
                }
            }
            out
        };
        v = order.iter().map(|&c| combine(&w, c)).collect();
        let av0 = combine(&aw, order[0]);
        let rq = dot(&v[0], &av0) / dot(&v[0], &v[0]);
        let r: Vec<T> = av0.iter().zip(&v[0]).map(|(&a, &x)| a - rq * x).collect();
        residual = norm(&r) / (rq.abs() * norm(&v[0])).max(T::min_positive_value());
        // inside a tight cluster the vector is ill-conditioned while the Ritz
        // value (an upper bound within `residual·λ` of an eigenvalue) has settled
        let settled = ((prev_rq - rq) / rq).abs() <= tol && residual <= tol.sqrt();
        prev_rq = rq;
        if residual <= tol || settled {
            let x0 = v.swap_remove(0);
            let nx = norm(&x0);
            return Ok(finish(form, x0.into_iter().map(|c| c / nx).collect(), rq / mass, opts.max_outer + it, residual));
        }
    }
    Err(Error::NonConvergence { what: "inverse iteration", iterations: 2 * opts.max_outer, residual: residual.to_f64_() })
}

/// Modified Gram–Schmidt, applied twice; drops numerically dependent columns.
fn orthonormalise<T: Real>(w: &mut Vec<Vec<T>>) {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(w.len());
    for mut c in w.drain(..) {
        let n0 = norm(&c);
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &c);
                for (ci, &qi) in c.iter_mut().zip(q) {
                    *ci = *ci - p * qi;
                }
            }
        }
        let nc = norm(&c);
        if nc > n0 * lit(1e-10) {
            scale(nc.recip(), &mut c);
            out.push(c);
        }
    }
    *w = out;
}

fn finish<T: Real>(form: &NonlocalForm<T>, mut x: Vec<T>, lambda: T, it: usize, residual: T) -> EigResult<T> {
    if let Some(&first) = x.iter().find(|v| **v != T::zero()) {
        if first < T::zero() {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    EigResult { lambda, vector: form.scatter(&x), iterations: it, residual, unknowns: form.len() }
}

/// Eigenvalue of the domain's active nodes; punctures removed when asked.
pub fn domain_eigenvalue<T: Real>(dom: &RasterDomain<T>, s: FractionalOrder<T>, remove_punctures: bool, opts: &EigOptions) -> Result<EigResult<T>> {
    let op = GridOperator::for_domain(dom, s);
    let form = NonlocalForm::full(op, &dom.active_mask(remove_punctures))?;
    smallest_eigenvalue(&form, opts)
}

/// Rayleigh quotient `uᵀAu / uᵀMu` of a grid function.
pub fn rayleigh_quotient<T: Real>(form: &NonlocalForm<T>, u: &GridFunction<T>) -> Result<T> {
    let x = form.gather(u)?;
    let den = form.mass_norm2(&x);
    if den == T::zero() {
        return Err(Error::Precondition("zero trial function".into()));
    }
    Ok(form.quadratic(&x) / den)
}

/// Closed-form trial functions for Rayleigh-quotient upper bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialDescriptor<T> {
    /// `u_n(x) = u(x/n)` on `(-n, n)` with `u = (1-x²)₊^p`.
    ScaledBump { n: T, p: u32 },
    /// `u_n · φ_{n,s,ε}` on `ℝ ∖ ℤ` bounded through the Minkowski chain.
    Funnel { s: T, eps: T, n: u32, p: u32 },
    /// Product domain `A × ℝ`: `α_s` times the bound for `A`.
    Product { inner: Box<TrialDescriptor<T>> },
    /// `g(x₁) q(x₂)` in the plane.
    Tensor { g: Profile<T>, q: Profile<T> },
}

/// A Rayleigh-quotient upper bound and its parts.
#[derive(Clone, Debug, Serialize)]
pub struct RayleighBound<T> {
    pub value: T,
    pub seminorm2: Option<T>,
    pub norm2: Option<T>,
}

impl<T: Real> TrialDescriptor<T> {
    /// Parameters of the funnel trial for order `s`: `ε = 10^{-1/(2s-1)}`,
    /// `n = (⌊1/(2s-1)⌋ + 1)²`.
    pub fn funnel_for(s: T, p: u32) -> Result<Self> {
        let (eps, n) = funnel_parameters(s)?;
        Ok(TrialDescriptor::Funnel { s, eps, n, p })
    }

    pub fn validate(&self, s: T) -> Result<()> {
        match self {
            TrialDescriptor::ScaledBump { n, p } => {
                if !(*n > T::zero()) || *p == 0 {
                    return Err(Error::Precondition("scaled bump needs n > 0 and p ≥ 1".into()));
                }
            }
            TrialDescriptor::Funnel { s: fs, eps, n, p } => {
                if !(*fs > lit(0.5) && *fs < T::one()) {
                    return Err(Error::InvalidOrder(fs.to_f64_(), "funnel needs s in (1/2, 1)"));
                }
                if (*fs - s).abs() > lit(1e-14) {
                    return Err(Error::Precondition("funnel order must match the seminorm order".into()));
                }
                if !(*eps > T::zero() && *eps < lit(0.1)) || *n == 0 || *p == 0 {
                    return Err(Error::Precondition("funnel needs 0 < ε < 1/10, n ≥ 1, p ≥ 1".into()));
                }
            }
            TrialDescriptor::Product { inner } => inner.validate(s)?,
            TrialDescriptor::Tensor { .. } => {}
        }
        Ok(())
    }
}

/// Step-5 parameters `(ε, n)` of the funnel trial.
pub fn funnel_parameters<T: Real>(s: T) -> Result<(T, u32)> {
    if !(s > lit(0.5) && s < T::one()) {
        return Err(Error::InvalidOrder(s.to_f64_(), "funnel needs s in (1/2, 1)"));
    }
    let b = s + s - T::one();
    let eps = lit::<T>(0.1).powf(b.recip());
    let m = (b.recip() + lit(1e-9)).floor().to_f64_() as u32 + 1;
    Ok((eps, m * m))
}

/// `[trial]² / ‖trial‖²` (or the documented bound on it).
pub fn rayleigh_upper_bound<T: Real>(trial: &TrialDescriptor<T>, s: T, tol: f64) -> Result<RayleighBound<T>> {
    trial.validate(s)?;
    match trial {
        TrialDescriptor::ScaledBump { n, p } => {
            let f = Profile::poly(T::zero(), *n, *p);
            let sn = seminorm_1d(&f, s, tol)?;
            let n2 = f.norm2(tol)?;
            Ok(RayleighBound { value: sn / n2, seminorm2: Some(sn), norm2: Some(n2) })
        }
        TrialDescriptor::Funnel { s: _, eps, n, p } => funnel_bound(s, *eps, *n, *p, tol),
        TrialDescriptor::Product { inner } => {
            let b = rayleigh_upper_bound(inner, s, tol)?;
            Ok(RayleighBound { value: alpha(s)? * b.value, seminorm2: None, norm2: None })
        }
        TrialDescriptor::Tensor { g, q } => {
            let sn = seminorm_tensor_2d(g, q, s, tol)?;
            let n2 = tensor_norm2(g, q, tol)?;
            Ok(RayleighBound { value: sn / n2, seminorm2: Some(sn), norm2: Some(n2) })
        }
    }
}

/// `(([u_n] + ‖u‖_∞ √(2n+1) ε^{1/2-s} [ζ_s]) / ‖u_n φ‖)²`, an upper bound for
/// the quotient of `u_n φ_{n,s,ε}` and hence for `λ₁ˢ(ℝ ∖ ℤ)`.
fn funnel_bound<T: Real>(s: T, eps: T, n: u32, p: u32, tol: f64) -> Result<RayleighBound<T>> {
    let nn = T::from_u32(n).unwrap();
    let u = Profile::poly(T::zero(), T::one(), p);
    let half: T = lit(0.5);
    let u_sn = seminorm_1d(&u, s, tol)?.sqrt() * nn.powf(half - s);
    let zeta = zeta_seminorm(s, tol)?.total.sqrt();
    let phi_sn = (lit::<T>(2.0) * nn + T::one()).sqrt() * eps.powf(half - s) * zeta;
    let norm2 = funnel_norm2(&u, nn, n, eps, s, tol)?;
    let root = (u_sn + u.sup() * phi_sn) / norm2.sqrt();
    Ok(RayleighBound { value: root * root, seminorm2: None, norm2: Some(norm2) })
}

/// `‖u(·/n) φ_{n,s,ε}‖²_{L²(-n,n)}`.
fn funnel_norm2<T: Real>(u: &Profile<T>, nn: T, n: u32, eps: T, s: T, tol: f64) -> Result<T> {
    let full = u.norm2(tol)? * nn;
    let beta = s + s - T::one();
    let two: T = lit(2.0);
    let opts = AdaptiveOptions { abs_tol: tol * 1e-3, rel_tol: tol, max_intervals: 4000 };
    let mut corr = T::zero();
    let n = n as i64;
    for j in -n..=n {
        let c = T::from_i64(j).unwrap();
        // local variable t = (x - j)/ε on (-1, 1): ∫ u_n² (2ζ - ζ²) dx
        let g = |t: T| {
            let z = T::one() - t.abs().powf(beta);
            let un = u.eval((c + eps * t) / nn);
            un * un * (two * z - z * z)
        };
        corr = corr + eps * adaptive(g, -T::one(), T::one(), &[T::zero()], opts)?.value;
    }
    Ok(full - corr)
}

/// One refinement level of the point-removal study.
#[derive(Clone, Debug, Serialize)]
pub struct RemovalRow<T> {
    pub h: T,
    pub lambda: T,
    pub lambda_removed: T,
    pub gap: T,
}

/// `λ_h(Ω ∖ {punctures}) - λ_h(Ω)` along a sequence of rasters.
pub fn point_removal_study<T: Real>(levels: &[RasterDomain<T>], s: FractionalOrder<T>, opts: &EigOptions) -> Result<Vec<RemovalRow<T>>> {
    levels
        .iter()
        .map(|dom| {
            let full = domain_eigenvalue(dom, s, false, opts)?.lambda;
            let removed = domain_eigenvalue(dom, s, true, opts)?.lambda;
            Ok(RemovalRow { h: dom.h, lambda: full, lambda_removed: removed, gap: removed - full })
        })
        .collect()
}

/// `(1 - s) λ₁ˢ` for one order.
#[derive(Clone, Debug, Serialize)]
pub struct BbmRow<T> {
    pub s: T,
    pub lambda: T,
    pub scaled: T,
    /// Richardson-extrapolated `(1 - s) λ` when a coarse grid is supplied.
    pub extrapolated: Option<T>,
}

/// BBM sweep on `fine` (and optionally `coarse` at twice the spacing for
/// Richardson extrapolation with rate `h^{rate}`).
pub fn bbm_sweep<T: Real>(fine: &RasterDomain<T>, coarse: Option<&RasterDomain<T>>, s_list: &[T], rate: T, opts: &EigOptions) -> Result<Vec<BbmRow<T>>> {
    s_list
        .iter()
        .map(|&s| {
            let order = FractionalOrder::above_half(s)?;
            let lf = domain_eigenvalue(fine, order, false, opts)?.lambda;
            let extrapolated = match coarse {
                Some(c) => {
                    let lc = domain_eigenvalue(c, order, false, opts)?.lambda;
                    let f = lit::<T>(2.0).powf(rate);
                    Some((T::one() - s) * (f * lf - lc) / (f - T::one()))
                }
                None => None,
            };
            Ok(BbmRow { s, lambda: lf, scaled: (T::one() - s) * lf, extrapolated })
        })
        .collect()
}

/// Rayleigh quotient of the discrete ground state in the consistent
/// (bilinear) mass: an upper bound for the continuum eigenvalue up to
/// stencil quadrature error.
pub fn consistent_mass_quotient<T: Real>(form: &NonlocalForm<T>, eig: &EigResult<T>) -> Result<T> {
    let (nx, ny) = form.grid_dims();
    let u = &eig.vector;
    let h = form.h();
    // bilinear mass stencil: h² (4 1 1 …)/36 tensor of (1/6, 4/6, 1/6)
    let w = [lit::<T>(1.0 / 6.0), lit(4.0 / 6.0), lit(1.0 / 6.0)];
    let mut acc = T::zero();
    for j in 0..ny {
        for i in 0..nx {
            let v = u.values[j * nx + i];
            if v == T::zero() {
                continue;
            }
            let mut mv = T::zero();
            for (b, wb) in w.iter().enumerate() {
                for (a, wa) in w.iter().enumerate() {
                    let (ii, jj) = (i as i64 + a as i64 - 1, j as i64 + b as i64 - 1);
                    if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                        mv = mv + *wa * *wb * u.values[jj as usize * nx + ii as usize];
                    }
                }
            }
            acc = acc + v * mv;
        }
    }
    let x = form.gather(u)?;
    Ok(form.quadratic(&x) / (acc * h * h))
}

/// `φ_{n,s,ε}(x) = 1 - Σ_{|j| ≤ n} ζ_s((x - j)/ε)`.
pub fn funnel_cutoff<T: Real>(s: T, eps: T, n: u32, x: T) -> T {
    let beta = s + s - T::one();
    let j = x.round();
    if j.abs() > T::from_u32(n).unwrap() {
        return T::one();
    }
    // supports are disjoint (ε < 1/2): only the nearest integer contributes
    let t = ((x - j) / eps).abs();
    if t >= T::one() {
        T::one()
    } else {
        t.powf(beta)
    }
}

/// One member of a `k`-sweep.
#[derive(Clone, Debug, Serialize)]
pub struct KRow<T> {
    pub k: usize,
    pub lambda: T,
    /// `k^s λ`.
    pub scaled: T,
    pub unknowns: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct KSweep<T> {
    pub s: T,
    pub rows: Vec<KRow<T>>,
    /// `max / min` of `k^s λ` over the list.
    pub spread: T,
}

/// Eigenvalues of `family(k)` with punctures removed, scaled by `k^s`.
pub fn k_sweep<T: Real, F: Fn(usize) -> Result<RasterDomain<T>>>(family: F, ks: &[usize], s: T, opts: &EigOptions) -> Result<KSweep<T>> {
    let order = FractionalOrder::above_half(s)?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let dom = family(k)?;
        let e = domain_eigenvalue(&dom, order, true, opts)?;
        rows.push(KRow { k, lambda: e.lambda, scaled: lit::<T>(k as f64).powf(s) * e.lambda, unknowns: e.unknowns });
    }
    Ok(KSweep { s, spread: spread(rows.iter().map(|r| r.scaled)), rows })
}

/// `max / min` of a positive sequence (`1` when empty).
pub fn spread<T: Real>(values: impl Iterator<Item = T>) -> T {
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    let mut any = false;
    for v in values {
        any = true;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if any {
        hi / lo
    } else {
        T::one()
    }
}
