//! Behaviour of `λ₁ˢ` on the punctured comb as `s ↘ 1/2`.

use serde::Serialize;

use super::families::{build_family, FamilyKind, FamilySpec};
use crate::constants::alpha;
use crate::error::{Error, Result};
use crate::gagliardo::FractionalOrder;
use crate::scalar::{lit, Real};
use crate::spectral::{domain_eigenvalue, rayleigh_upper_bound, spread, EigOptions, TrialDescriptor};

#[derive(Clone, Copy, Debug)]
pub struct SHalfOptions {
    /// Half-width `W` of the comb window (default 8).
    pub half_width: f64,
    /// Spacing of the discrete window; `1/h` must be an even integer.
    pub h: f64,
    /// Also solve the discrete eigenproblem on the window.
    pub discrete: bool,
    /// Exponent `p` of `u = (1-x²)₊^p` in the funnel trial.
    pub p: u32,
    pub trial_tol: f64,
    pub eig: EigOptions,
}

impl Default for SHalfOptions {
    fn default() -> Self {
        Self { half_width: 8.0, h: 0.5, discrete: true, p: 2, trial_tol: 1e-8, eig: EigOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SHalfRow<T> {
    pub s: T,
    pub eps: T,
    pub n: u32,
    /// `α_s` times the funnel quotient bound: an upper bound for `λ₁ˢ(Θ_k)`.
    pub upper: T,
    /// `upper / (2s - 1)`.
    pub ratio: T,
    pub window_half_height: f64,
    pub eig: Option<T>,
    pub eig_ratio: Option<T>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SHalfSweep<T> {
    pub k: usize,
    pub rows: Vec<SHalfRow<T>>,
    /// `max / min` of `ratio` over the list.
    pub spread: T,
    pub max_ratio: T,
}

/// Upper bounds `α_s · Q(u_n φ_{n,s,ε})` with the step-5 parameters and,
/// optionally, discrete eigenvalues of the truncated comb, for `s ∈ (1/2, 3/4)`.
pub fn s_half_sweep<T: Real>(k: usize, s_list: &[T], opts: &SHalfOptions) -> Result<SHalfSweep<T>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if !(s > lit(0.5) && s < lit(0.75)) {
            return Err(Error::InvalidOrder(s.to_f64_(), "the s → 1/2 sweep needs 1/2 < s < 3/4"));
        }
        let trial = TrialDescriptor::funnel_for(s, opts.p)?;
        let (eps, n) = match trial {
            TrialDescriptor::Funnel { eps, n, .. } => (eps, n),
            _ => unreachable!(),
        };
        let upper = alpha(s)? * rayleigh_upper_bound(&trial, s, opts.trial_tol)?.value;
        let beta = s + s - T::one();
        // the window must contain the trial's support (-n, n) across the teeth
        let wanted = opts.half_width.max(k as f64);
        let height = wanted.max(n as f64 + 1.0);
        let warning = (height > wanted).then(|| format!("window half-height grown from {wanted} to {height} to hold (-{n}, {n})"));
        let (eig, eig_ratio) = if opts.discrete {
            let spec = FamilySpec::new(
                FamilyKind::CombWindow { k, half_width: opts.half_width, half_height: Some(height) },
                opts.h,
            );
            let dom = build_family::<T>(&spec)?;
            let l = domain_eigenvalue(&dom, FractionalOrder::above_half(s)?, true, &opts.eig)?.lambda;
            (Some(l), Some(l / beta))
        } else {
            (None, None)
        };
        rows.push(SHalfRow { s, eps, n, upper, ratio: upper / beta, window_half_height: height, eig, eig_ratio, warning });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(T::zero(), T::max);
    Ok(SHalfSweep { k, spread: spread(rows.iter().map(|r| r.ratio)), max_ratio, rows })
}
