//! Explicit constants by closed form or quadrature, corpus estimates of the
//! inexplicit ones, and the lower-bound constant `ϑ_s`.

pub mod corpus;
pub mod estimate;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gagliardo::FractionalOrder;
use crate::quadrature::{adaptive, adaptive_power_both, gauss_legendre, ln_gamma, AdaptiveOptions};
use crate::scalar::{lit, Real};

pub use corpus::{default_corpus, CorpusFn};
pub use estimate::{estimate_a_dir, estimate_m_pw, estimate_phi22, EstimateOptions, Estimated};

/// Orders over which the inexplicit constants are enveloped.
pub const ESTIMATION_GRID: [f64; 5] = [0.55, 0.65, 0.75, 0.85, 0.95];

/// Where a number came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    Estimated { corpus: usize },
    Configured,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::ClosedForm => write!(f, "closed-form"),
            Provenance::Quadrature => write!(f, "quadrature"),
            Provenance::Estimated { corpus } => write!(f, "estimated({corpus})"),
            Provenance::Configured => write!(f, "configured"),
        }
    }
}

/// A value with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Entry<T> {
    pub fn new(value: T, provenance: Provenance) -> Self {
        Self { value, provenance }
    }
}

const TAIL_START: f64 = 1e4;

fn opts(tol: f64) -> AdaptiveOptions {
    AdaptiveOptions { abs_tol: tol * 1e-2, rel_tol: tol, max_intervals: 20_000 }
}

/// `1/A_s = Γ(1+2s) sin(πs) / (2π)` inverted: the closed form of `A_s`.
pub fn fourier_a_closed<T: Real>(s: T) -> Result<T> {
    FractionalOrder::new(s)?;
    let sf = s.to_f64_();
    let g = ln_gamma(1.0 + 2.0 * sf).exp();
    Ok(lit(g * (std::f64::consts::PI * sf).sin() / (2.0 * std::f64::consts::PI)))
}

/// `A_s = (∫_ℝ |e^{it} - 1|² |t|^{-1-2s} dt)^{-1}` by quadrature: adaptive on
/// the first period, fixed Gauss per period up to `10⁴`, asymptotic tail.
pub fn fourier_a<T: Real>(s: T) -> Result<T> {
    FractionalOrder::new(s)?;
    let sf = s.to_f64_();
    let e = -1.0 - 2.0 * sf;
    let two_pi = 2.0 * std::f64::consts::PI;
    let f = |t: f64| 4.0 * (0.5 * t).sin().powi(2) * t.powf(e);
    // on [0, t0] integrate 2 - 2cos t = t² - t⁴/12 + t⁶/360 - ... termwise
    // (a substitution would underflow to t = 0 as s → 1)
    let t0: f64 = 0.25;
    let mut head = 0.0;
    let mut coef = 1.0;
    for m in 1..=6 {
        let q = 2.0 * m as f64 - 2.0 * sf;
        head += coef * t0.powf(q) / q;
        coef *= -1.0 / ((2 * m + 1) as f64 * (2 * m + 2) as f64);
    }
    let mut acc = head + adaptive(f, t0, two_pi, &[], opts(1e-13))?.value;
    let panels = (TAIL_START / two_pi).ceil() as usize;
    let rule = gauss_legendre(48);
    let mut parts = Vec::with_capacity(panels);
    for k in 1..panels {
        let a = two_pi * k as f64;
        parts.push(rule.integrate(a, a + two_pi, f));
    }
    acc += crate::quadrature::compensated_sum(parts);
    let t = two_pi * panels as f64;
    // ∫_T^∞ 2(1 - cos t) t^{-1-2s}: power part exact, cosine part by parts
    let a = 1.0 + 2.0 * sf;
    let cos_tail = -t.sin() * t.powf(-a) + a * t.cos() * t.powf(-a - 1.0) + a * (a + 1.0) * t.sin() * t.powf(-a - 2.0);
    acc += 2.0 * t.powf(-2.0 * sf) / (2.0 * sf) - 2.0 * cos_tail;
    // both halves of the line
    Ok(lit(1.0 / (2.0 * acc)))
}

/// Morrey constant `𝔪_s = (3-2s)(2s-1) / (2·4^{2-s} A_s)` for `1/2 < s < 1`.
pub fn morrey_m<T: Real>(s: T) -> Result<T> {
    FractionalOrder::above_half(s)?;
    let a = fourier_a(s)?;
    let three: T = lit(3.0);
    let two: T = lit(2.0);
    Ok((three - two * s) * (two * s - T::one()) / (two * lit::<T>(4.0).powf(two - s) * a))
}

/// `α_s = ∫_ℝ (1+t²)^{-(1+s)} dt` by quadrature with a power-law tail, `0 ≤ s ≤ 1`.
pub fn alpha<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::InvalidOrder(s.to_f64_(), "alpha needs s in [0, 1]"));
    }
    let sf = s.to_f64_();
    let e = -(1.0 + sf);
    let f = |t: f64| (1.0 + t * t).powf(e);
    let head = adaptive(f, 0.0, TAIL_START, &[1.0, 10.0, 100.0, 1000.0], opts(1e-14))?.value;
    let t = TAIL_START;
    // t^{-2-2s} (1 + t^{-2})^{-(1+s)} expanded to second order
    let tail = t.powf(-1.0 - 2.0 * sf) / (1.0 + 2.0 * sf) - (1.0 + sf) * t.powf(-3.0 - 2.0 * sf) / (3.0 + 2.0 * sf);
    Ok(lit(2.0 * (head + tail)))
}

/// `√π Γ(s+½) / Γ(s+1)`, the closed form of [`alpha`].
pub fn alpha_closed<T: Real>(s: T) -> T {
    let sf = s.to_f64_();
    lit(std::f64::consts::PI.sqrt() * (ln_gamma(sf + 0.5) - ln_gamma(sf + 1.0)).exp())
}

/// Pieces of `[ζ_s]²_{W^{s,2}(ℝ)}`: the `(-1,1)²` block and the two
/// exterior strips.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZetaSeminorm<T> {
    pub total: T,
    pub i1: T,
    pub i2: T,
    pub i3: T,
}

/// `[ζ_s]²` for the funnel profile `ζ_s(x) = (1 - |x|^{2s-1})₊`, `1/2 < s < 1`.
///
/// The square block is reduced by homogeneity of `|x|^{2s-1}`: with
/// `β = 2s-1`, `y = τx`, each quadrant pair gives `2J/(2s-1)` where
/// `J = ∫₀¹ (1-τ^β)² (1∓τ)^{-1-2s} dτ`.
pub fn zeta_seminorm<T: Real>(s: T, tol: f64) -> Result<ZetaSeminorm<T>> {
    FractionalOrder::above_half(s)?;
    let sf = s.to_f64_();
    let beta = 2.0 * sf - 1.0;
    let k = 1.0 / beta;
    let o = opts(tol * 1e-2);
    // x = (1-w)^{1/β} straightens the cusp of |x|^β at the origin, leaving
    // ζ = w; then 1 - x = -expm1(k ln(1-w)).
    let lift = |w: f64| -(k * (-w).ln_1p()).exp_m1();
    let jac = |w: f64| k * ((k - 1.0) * (-w).ln_1p()).exp();
    // near w = 0 the integrand of J behaves like w^{1-2s}
    let p = (2.0 / (2.0 - 2.0 * sf)).clamp(1.0, 200.0);
    // the Jacobian carries (1-w)^{k-1} at w = 1
    let q = (2.0 / (k - 1.0)).clamp(1.0, 200.0);
    // w² lift^{-e} is evaluated as w^{2-e} (w/lift)^e: no overflow for tiny w
    let near = |w: f64, e: f64| w.powf(2.0 - e) * (w / lift(w)).powf(e);
    let j_minus = adaptive_power_both(
        |w: f64| if w <= 0.0 || w >= 1.0 { 0.0 } else { near(w, 1.0 + 2.0 * sf) * jac(w) },
        0.0,
        1.0,
        p,
        q,
        o,
    )?
    .value;
    let j_plus = adaptive_power_both(|w: f64| w * w * (2.0 - lift(w)).powf(-1.0 - 2.0 * sf) * jac(w), 0.0, 1.0, 1.0, q, o)?.value;
    let i1 = 4.0 * (j_minus + j_plus) / beta;
    // ∫_{-1}^{1} ζ² (1∓x)^{-2s} dx / s, folded onto (0, 1): the near and the
    // far end of the strip contribute in both cases, so ℐ₂ = ℐ₃
    let g = |w: f64| {
        if w <= 0.0 || w >= 1.0 {
            return 0.0;
        }
        (near(w, 2.0 * sf) + w * w * (2.0 - lift(w)).powf(-2.0 * sf)) * jac(w)
    };
    let i2 = adaptive_power_both(g, 0.0, 1.0, 2.0, q, o)?.value / sf;
    let i3 = i2;
    Ok(ZetaSeminorm { total: lit(i1 + i2 + i3), i1: lit(i1), i2: lit(i2), i3: lit(i3) })
}

/// `ϑ_s = ((50(2-√2))^{(1-2s)/2} / 2^{1+2s}) · 𝔪_s φ(2,2) / (200 𝒜)`.
pub fn theta_from<T: Real>(s: T, m_s: T, phi22: T, a_dir: T) -> T {
    let two: T = lit(2.0);
    let base: T = lit(50.0 * (2.0 - std::f64::consts::SQRT_2));
    let geo = base.powf((T::one() - two * s) * lit(0.5)) / two.powf(T::one() + two * s);
    geo * m_s * phi22 / (lit::<T>(200.0) * a_dir)
}

/// Per-order record of the table.
#[derive(Clone, Debug, Serialize)]
pub struct OrderRecord<T> {
    pub s: T,
    pub fourier_a: Entry<T>,
    pub morrey_m: Option<Entry<T>>,
    pub alpha: Entry<T>,
    pub zeta: Option<Entry<T>>,
}

/// Explicit and estimated constants for a list of orders.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsTable<T> {
    pub records: Vec<OrderRecord<T>>,
    pub a_dir: Option<Entry<T>>,
    pub m_pw: Option<Entry<T>>,
    pub phi22: Option<Entry<T>>,
}

impl<T: Real> ConstantsTable<T> {
    /// Explicit constants for each order in `s_list`; no global entries.
    pub fn explicit(s_list: &[T], tol: f64) -> Result<Self> {
        use rayon::prelude::*;
        let records = s_list
            .par_iter()
            .map(|&s| OrderRecord::compute(s, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records, a_dir: None, m_pw: None, phi22: None })
    }

    /// Explicit records for `s_list`, configured globals from `cfg`, and
    /// corpus estimates (over [`ESTIMATION_GRID`]) for the rest.
    pub fn standard(s_list: &[T], tol: f64, cfg: &BTreeMap<String, String>) -> Result<Self> {
        let mut t = Self::explicit(s_list, tol)?;
        t.apply_config(cfg)?;
        let grid: Vec<T> = ESTIMATION_GRID.iter().map(|&v| lit(v)).collect();
        t.estimate_globals(&default_corpus(), &grid, &EstimateOptions::default())?;
        Ok(t)
    }

    /// Overrides global entries from `key=value` settings (`A_dir`, `M_pw`, `phi22`).
    pub fn apply_config(&mut self, cfg: &BTreeMap<String, String>) -> Result<()> {
        for (key, slot) in [("A_dir", &mut self.a_dir), ("M_pw", &mut self.m_pw), ("phi22", &mut self.phi22)] {
            if let Some(v) = cfg.get(key) {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { line: 0, msg: format!("{key}: not a number: {v}") })?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::Parse { line: 0, msg: format!("{key} must be positive") });
                }
                *slot = Some(Entry::new(lit(x), Provenance::Configured));
            }
        }
        Ok(())
    }

    /// Fills the global entries that are still missing (configured values are
    /// kept) by corpus estimation.
    pub fn estimate_globals(&mut self, corpus: &[CorpusFn], s_grid: &[T], opts: &EstimateOptions) -> Result<()> {
        if self.a_dir.is_none() {
            self.a_dir = Some(estimate_a_dir(corpus, s_grid, opts)?.entry());
        }
        if self.m_pw.is_none() {
            self.m_pw = Some(estimate_m_pw(corpus, s_grid, opts)?.entry());
        }
        if self.phi22.is_none() {
            self.phi22 = Some(estimate_phi22(corpus, s_grid, opts)?.entry());
        }
        Ok(())
    }

    pub fn record(&self, s: T) -> Option<&OrderRecord<T>> {
        self.records.iter().find(|r| (r.s - s).abs() <= lit(1e-12))
    }

    /// `𝔪_s` from the table when present, otherwise computed on the spot.
    pub fn morrey(&self, s: T) -> Result<T> {
        match self.record(s).and_then(|r| r.morrey_m) {
            Some(e) => Ok(e.value),
            None => morrey_m(s),
        }
    }

    /// `ϑ_s` from the table entries.
    pub fn theta(&self, s: T) -> Result<T> {
        FractionalOrder::above_half(s)?;
        let phi = self.phi22.ok_or(Error::MissingConstant("phi22"))?.value;
        let a = self.a_dir.ok_or(Error::MissingConstant("A_dir"))?.value;
        Ok(theta_from(s, self.morrey(s)?, phi, a))
    }

    /// True when any global entry is corpus-estimated.
    pub fn heuristic(&self) -> bool {
        [self.a_dir, self.m_pw, self.phi22]
            .iter()
            .flatten()
            .any(|e| matches!(e.provenance, Provenance::Estimated { .. }))
    }

    /// `constants.csv`: one row per order, global entries repeated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,A_s,m_s,alpha_s,zeta,theta,A_dir,M_pw,phi22,provenance\n");
        let fmt = |e: Option<Entry<T>>| e.map(|e| format!("{:.12e}", e.value.to_f64_())).unwrap_or_default();
        for r in &self.records {
            let theta = self.theta(r.s).ok().map(|t| format!("{:.12e}", t.to_f64_())).unwrap_or_default();
            let mut prov = format!("A_s:{};alpha_s:{}", r.fourier_a.provenance, r.alpha.provenance);
            if let Some(m) = r.morrey_m {
                let _ = write!(prov, ";m_s:{}", m.provenance);
            }
            if let Some(z) = r.zeta {
                let _ = write!(prov, ";zeta:{}", z.provenance);
            }
            for (name, e) in [("A_dir", self.a_dir), ("M_pw", self.m_pw), ("phi22", self.phi22)] {
                if let Some(e) = e {
                    let _ = write!(prov, ";{name}:{}", e.provenance);
                }
            }
            let _ = writeln!(
                out,
                "{},{:.12e},{},{:.12e},{},{},{},{},{},{}",
                r.s.to_f64_(),
                r.fourier_a.value.to_f64_(),
                fmt(r.morrey_m),
                r.alpha.value.to_f64_(),
                fmt(r.zeta),
                theta,
                fmt(self.a_dir),
                fmt(self.m_pw),
                fmt(self.phi22),
                prov
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

impl<T: Real> OrderRecord<T> {
    pub fn compute(s: T, tol: f64) -> Result<Self> {
        let fourier_a = Entry::new(fourier_a(s)?, Provenance::Quadrature);
        let alpha = Entry::new(alpha(s)?, Provenance::Quadrature);
        let above = s > lit(0.5);
        let morrey_m = if above {
            Some(Entry::new(morrey_m(s)?, Provenance::Quadrature))
        } else {
            None
        };
        let zeta = if above {
            Some(Entry::new(zeta_seminorm(s, tol)?.total, Provenance::Quadrature))
        } else {
            None
        };
        Ok(Self { s, fourier_a, morrey_m, alpha, zeta })
    }
}
