//! Gagliardo seminorms of closed-form profiles by adaptive quadrature.
//!
//! In 1D we use `[f]² = 2 ∫_0^∞ τ^{-1-2s} D(τ) dτ` with the translation
//! defect `D(τ) = ∫ |f(x+τ) - f(x)|² dx`, which equals `2‖f‖²` once `τ`
//! exceeds the support width; the tail is then closed form. Tensor products
//! `g(x₁)q(x₂)` reduce to the 1D defects through
//! `D(z) = ‖g‖² D_q(z₂) + ‖q‖² D_g(z₁) - ½ D_g(z₁) D_q(z₂)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_power_both, gauss_legendre, AdaptiveOptions, Rule};
use crate::scalar::{lit, Real};

/// One-dimensional profile with known non-smooth points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile<T> {
    /// `(1 - ((x-c)/a)²)₊^p`.
    Poly { center: T, half: T, p: u32 },
    /// Funnel cut-off `ζ_β((x-c)/ε)` with `ζ(x) = (1 - |x|^{2β-1})₊`.
    Zeta { center: T, eps: T, s: T },
    /// `Σ_{j=-n}^{n} ζ((x-j)/ε)`, the complement of the multiple funnel.
    ZetaComb { n: u32, eps: T, s: T },
}

impl<T: Real> Profile<T> {
    pub fn poly(center: T, half: T, p: u32) -> Self {
        Profile::Poly { center, half, p }
    }

    pub fn zeta(s: T) -> Self {
        Profile::Zeta { center: T::zero(), eps: T::one(), s }
    }

    pub fn eval(&self, x: T) -> T {
        match *self {
            Profile::Poly { center, half, p } => {
                let t = (x - center) / half;
                let b = T::one() - t * t;
                if b <= T::zero() {
                    T::zero()
                } else {
                    b.powi(p as i32)
                }
            }
            Profile::Zeta { center, eps, s } => zeta_raw((x - center) / eps, s),
            Profile::ZetaComb { n, eps, s } => {
                let j = x.round();
                let n = T::from_u32(n).unwrap();
                if j.abs() > n {
                    return T::zero();
                }
                zeta_raw((x - j) / eps, s)
            }
        }
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (T, T) {
        match *self {
            Profile::Poly { center, half, .. } => (center - half, center + half),
            Profile::Zeta { center, eps, .. } => (center - eps, center + eps),
            Profile::ZetaComb { n, eps, .. } => {
                let n = T::from_u32(n).unwrap();
                (-n - eps, n + eps)
            }
        }
    }

    /// Sorted points where the profile fails to be smooth.
    pub fn breaks(&self) -> Vec<T> {
        match *self {
            Profile::Poly { center, half, .. } => vec![center - half, center + half],
            Profile::Zeta { center, eps, .. } => vec![center - eps, center, center + eps],
            Profile::ZetaComb { n, eps, .. } => {
                let n = n as i64;
                let mut v = Vec::with_capacity(3 * (2 * n as usize + 1));
                for j in -n..=n {
                    let j = T::from_i64(j).unwrap();
                    v.extend([j - eps, j, j + eps]);
                }
                v
            }
        }
    }

    /// Hölder exponent at the worst non-smooth point.
    pub fn holder(&self) -> T {
        match *self {
            Profile::Poly { .. } => T::one(),
            Profile::Zeta { s, .. } | Profile::ZetaComb { s, .. } => s + s - T::one(),
        }
    }

    /// Degree when the profile is piecewise polynomial between its breaks.
    fn poly_degree(&self) -> Option<u32> {
        match *self {
            Profile::Poly { p, .. } => Some(2 * p),
            _ => None,
        }
    }

    pub fn sup(&self) -> T {
        T::one()
    }

    /// `‖f‖²_{L²}`.
    pub fn norm2(&self, tol: f64) -> Result<T> {
        let (lo, hi) = self.support();
        let b = self.breaks();
        piecewise(lo, hi, &b, self.poly_degree().map(|d| 2 * d), self.holder(), tol, |x| {
            let v = self.eval(x);
            v * v
        })
    }

    /// Translation defect `D(τ) = ∫ |f(x+τ) - f(x)|² dx`, `τ ≥ 0`.
    pub fn defect(&self, tau: T, tol: f64) -> Result<T> {
        let tau = tau.abs();
        let (lo, hi) = self.support();
        if tau >= hi - lo {
            return Ok(lit::<T>(2.0) * self.norm2(tol)?);
        }
        let mut b = self.breaks();
        b.extend(self.breaks().into_iter().map(|x| x - tau));
        piecewise(lo - tau, hi, &b, self.poly_degree().map(|d| 2 * d), self.holder(), tol, |x| {
            let d = self.increment(x, tau);
            d * d
        })
    }

    /// `f(x+τ) - f(x)`, free of cancellation inside one funnel where
    /// `|y+δ|^β - |y|^β = |y|^β expm1(β ln1p(δ/y))`.
    pub fn increment(&self, x: T, tau: T) -> T {
        let funnel = |y: T, d: T, s: T| -> Option<T> {
            let y1 = y + d;
            if y == T::zero() || y.abs() >= T::one() || y1.abs() >= T::one() || (y > T::zero()) != (y1 > T::zero()) {
                return None;
            }
            let beta = s + s - T::one();
            let q = d / y;
            let ln_ratio = if q.abs() < lit(0.5) { q.ln_1p() } else { (y1 / y).ln() };
            Some(-y.abs().powf(beta) * (beta * ln_ratio).exp_m1())
        };
        let quick = match *self {
            Profile::Poly { center, half, p } => {
                // b₁ - b = -(τ/a)(t + t₁), then b₁ᵖ - bᵖ = (b₁ - b) Σ b₁ⁱ bᵖ⁻¹⁻ⁱ
                let t = (x - center) / half;
                let t1 = t + tau / half;
                let (b, b1) = (T::one() - t * t, T::one() - t1 * t1);
                if b <= T::zero() || b1 <= T::zero() {
                    None
                } else {
                    let diff = -(tau / half) * (t + t1);
                    let mut sum = T::zero();
                    for i in 0..p as i32 {
                        sum = sum + b1.powi(i) * b.powi(p as i32 - 1 - i);
                    }
                    Some(diff * sum)
                }
            }
            Profile::Zeta { center, eps, s } => funnel((x - center) / eps, tau / eps, s),
            Profile::ZetaComb { n, eps, s } => {
                let j = x.round();
                if j.abs() <= T::from_u32(n).unwrap() && (x + tau).round() == j {
                    funnel((x - j) / eps, tau / eps, s)
                } else {
                    None
                }
            }
        };
        quick.unwrap_or_else(|| self.eval(x + tau) - self.eval(x))
    }

    /// Differences of break points: where `D` itself is not smooth.
    fn defect_breaks(&self) -> Vec<T> {
        let b = self.breaks();
        if b.len() > 64 {
            // combs: the lattice of spacings is all that matters at coarse scale
            let (lo, hi) = self.support();
            let w = (hi - lo).ceil().to_f64_() as i64;
            return (1..=w).map(|k| T::from_i64(k).unwrap()).collect();
        }
        let mut out = Vec::new();
        for &x in &b {
            for &y in &b {
                if x > y {
                    out.push(x - y);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

fn zeta_raw<T: Real>(x: T, s: T) -> T {
    let a = x.abs();
    if a >= T::one() {
        T::zero()
    } else {
        // 1 - a^β without cancellation as a → 1
        -((s + s - T::one()) * a.ln()).exp_m1()
    }
}

/// Integrates over `[lo, hi]` split at `breaks`; exact Gauss when the
/// integrand is a polynomial of known degree on each piece.
fn piecewise<T: Real, F: Fn(T) -> T>(lo: T, hi: T, breaks: &[T], degree: Option<u32>, holder: T, tol: f64, f: F) -> Result<T> {
    let mut pts: Vec<T> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    match degree {
        Some(d) => {
            let rule: Rule = gauss_legendre(d as usize / 2 + 1);
            Ok(pts.windows(2).map(|w| rule.integrate(w[0], w[1], &f)).sum())
        }
        None => {
            // cusps like |x - b|^γ sit at the break points: flatten both ends
            // of every piece with x - a = (m - a) u^q
            let q = (2.0 / holder.to_f64_()).clamp(1.0, 60.0);
            // nonnegative integrands: per-piece relative accuracy suffices,
            // down to the ~1e-10 floor set by rounding in the increments
            let opts = AdaptiveOptions { abs_tol: tol * 1e-16, rel_tol: tol.max(1e-10), max_intervals: 20_000 };
            let mut acc = T::zero();
            for w in pts.windows(2) {
                acc = acc + adaptive_power_both(&f, w[0], w[1], q, q, opts)?.value;
            }
            Ok(acc)
        }
    }
}

/// Substitution exponent that tames `τ^{2γ-2s}` at the origin.
fn power_for<T: Real>(gamma: T, s: T) -> T {
    let e = gamma + gamma - s - s + T::one();
    (lit::<T>(2.0) / e).max(T::one()).min(lit(200.0))
}

/// `∫_0^R r^{-1-2s} g(r) dr` with `g(r) = O(r^{1+2γ})` at 0, via `r = R u^p`.
fn radial<T: Real, G: Fn(T) -> Result<T>>(g: G, r_max: T, s: T, gamma: T, kinks: &[T], tol: f64) -> Result<T> {
    let p = power_for(gamma, s);
    let two_s = s + s;
    // below r0 the defect is its leading power r^a (increments there sit at
    // the rounding floor); r0 sits well under every feature scale
    let feature = kinks.iter().copied().filter(|&k| k > T::zero()).fold(r_max, T::min);
    let r0 = feature * lit(1e-12);
    // local exponent from two samples also absorbs r² log r behaviour
    let (g0, g1) = (g(r0)?, g(r0 * lit(0.5))?);
    let nominal = (T::one() + gamma + gamma).min(lit(2.0));
    let a = if g0 > T::zero() && g1 > T::zero() {
        ((g0 / g1).ln() / lit::<T>(2.0).ln()).max(two_s + lit(1e-3)).min(lit(2.5))
    } else {
        nominal
    };
    let head = g0 * r0.powf(-two_s) / (a - two_s);
    let u0 = (r0 / r_max).powf(p.recip());
    let ubreaks: Vec<T> = kinks
        .iter()
        .filter(|&&k| k > r0 && k < r_max)
        .map(|&k| (k / r_max).powf(p.recip()))
        .collect();
    let mut err: Option<Error> = None;
    let opts = AdaptiveOptions { abs_tol: tol, rel_tol: tol, max_intervals: 20_000 };
    let est = adaptive(
        |u: T| {
            if err.is_some() {
                return T::zero();
            }
            let r = r_max * u.powf(p);
            match g(r) {
                Ok(v) => v * r.powf(-T::one() - two_s) * r_max * p * u.powf(p - T::one()),
                Err(e) => {
                    err = Some(e);
                    T::zero()
                }
            }
        },
        u0,
        T::one(),
        &ubreaks,
        opts,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(head + est.value)
}

/// `[f]²_{W^{s,2}(ℝ)}` for a closed-form profile.
pub fn seminorm_1d<T: Real>(f: &Profile<T>, s: T, tol: f64) -> Result<T> {
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::InvalidOrder(s.to_f64_(), "s must lie in (0, 1)"));
    }
    let (lo, hi) = f.support();
    let w = hi - lo;
    let inner_tol = tol * 1e-2;
    let n2 = f.norm2(inner_tol)?;
    let two: T = lit(2.0);
    let near = radial(|t| f.defect(t, inner_tol), w, s, f.holder(), &f.defect_breaks(), tol * 0.5)?;
    let tail = two * two * n2 * w.powf(-(s + s)) / (s + s);
    Ok(two * near + tail)
}

/// `[g ⊗ q]²_{W^{s,2}(ℝ²)}` for `u(x₁, x₂) = g(x₁) q(x₂)`.
pub fn seminorm_tensor_2d<T: Real>(g: &Profile<T>, q: &Profile<T>, s: T, tol: f64) -> Result<T> {
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::InvalidOrder(s.to_f64_(), "s must lie in (0, 1)"));
    }
    let inner_tol = tol * 1e-3;
    let (gl, gh) = g.support();
    let (ql, qh) = q.support();
    let (wg, wq) = (gh - gl, qh - ql);
    let ng = g.norm2(inner_tol)?;
    let nq = q.norm2(inner_tol)?;
    let half: T = lit(0.5);
    let gamma = g.holder().min(q.holder());
    let kg = g.defect_breaks();
    let kq = q.defect_breaks();
    let two_s = s + s;
    let theta_break = (wq / wg).atan();
    let mut err: Option<Error> = None;
    let opts = AdaptiveOptions { abs_tol: tol * 0.25, rel_tol: tol * 0.25, max_intervals: 4000 };
    let outer = adaptive(
        |th: T| {
            if err.is_some() {
                return T::zero();
            }
            let (c, sn) = (th.cos(), th.sin());
            let r_max = (wg / c).min(wq / sn);
            let mut kinks: Vec<T> = kg.iter().map(|&k| k / c).collect();
            kinks.extend(kq.iter().map(|&k| k / sn));
            let d = |r: T| -> Result<T> {
                let dg = g.defect(r * c, inner_tol)?;
                let dq = q.defect(r * sn, inner_tol)?;
                Ok(ng * dq + nq * dg - half * dg * dq)
            };
            let near = match radial(d, r_max, s, gamma, &kinks, tol * 0.1) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return T::zero();
                }
            };
            near + lit::<T>(2.0) * ng * nq * r_max.powf(-two_s) / two_s
        },
        T::zero(),
        T::FRAC_PI_2(),
        &[theta_break],
        opts,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(lit::<T>(4.0) * outer.value)
}

/// `‖g ⊗ q‖²_{L²} = ‖g‖² ‖q‖²`.
pub fn tensor_norm2<T: Real>(g: &Profile<T>, q: &Profile<T>, tol: f64) -> Result<T> {
    Ok(g.norm2(tol)? * q.norm2(tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_norm_closed_form() {
        // ∫_{-1}^{1} (1-t²)² dt = 16/15
        let f = Profile::<f64>::poly(0.0, 1.0, 1);
        assert!((f.norm2(1e-12).unwrap() - 16.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn defect_saturates() {
        let f = Profile::<f64>::poly(0.3, 0.5, 2);
        let n2 = f.norm2(1e-12).unwrap();
        assert!((f.defect(0.999_999, 1e-12).unwrap() - 2.0 * n2).abs() < 1e-9);
        assert!(f.defect(0.0, 1e-12).unwrap().abs() < 1e-15);
    }

    #[test]
    fn comb_profile_matches_single_funnels() {
        let c = Profile::<f64>::ZetaComb { n: 2, eps: 0.05, s: 0.7 };
        let z = Profile::Zeta { center: -1.0, eps: 0.05, s: 0.7 };
        for &x in &[-1.04, -1.0, -0.97, -0.5] {
            assert!((c.eval(x) - z.eval(x)).abs() < 1e-15);
        }
        assert_eq!(c.eval(3.0), 0.0);
    }
}
