//! End-to-end check of the lower bound against the discrete eigenvalue and
//! analytic upper bounds.

use serde::Serialize;

use super::certificate::{lower_bound_certificate, CertificateOptions, LowerBoundCertificate};
use crate::constants::ConstantsTable;
use crate::error::Result;
use crate::gagliardo::{FractionalOrder, Profile};
use crate::geometry::RasterDomain;
use crate::scalar::{lit, Real};
use crate::spectral::{domain_eigenvalue, rayleigh_upper_bound, EigOptions, TrialDescriptor};

/// Axis-aligned rectangle `(x0, x1) × (y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

/// Largest-area block of inside nodes, widened by `h` on each side: the open
/// rectangle spanned by the hat functions of the block (punctures ignored).
/// With `square` set the block is constrained to equal node counts.
pub fn inscribed_rectangle<T: Real>(dom: &RasterDomain<T>, square: bool) -> Option<Rect<T>> {
    let (nx, ny) = (dom.nx, dom.ny);
    let mut heights = vec![0usize; nx];
    let mut best: Option<(usize, usize, usize, usize, usize)> = None; // area, i0, i1, j0, j1
    for j in 0..ny {
        for i in 0..nx {
            heights[i] = if dom.inside(i, j) { heights[i] + 1 } else { 0 };
        }
        // largest rectangle in the histogram ending at row j
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..=nx {
            let cur = if i < nx { heights[i] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < cur {
                    break;
                }
                stack.pop();
                let hgt = heights[top];
                let left = stack.last().map_or(0, |&l| l + 1);
                let width = i - left;
                let (w, hh) = if square { (width.min(hgt), width.min(hgt)) } else { (width, hgt) };
                let area = w * hh;
                if area > 0 && best.is_none_or(|b| area > b.0) {
                    best = Some((area, left, left + w - 1, j + 1 - hh, j));
                }
            }
            stack.push(i);
        }
    }
    best.map(|(_, i0, i1, j0, j1)| {
        let a = dom.node_point(i0, j0);
        let b = dom.node_point(i1, j1);
        Rect { x0: a.x - dom.h, x1: b.x + dom.h, y0: a.y - dom.h, y1: b.y + dom.h }
    })
}

/// Tensor bumps `(1-ξ²)₊^p (1-η²)₊^p` on the inscribed rectangle and square.
pub fn default_trials<T: Real>(dom: &RasterDomain<T>) -> Vec<TrialDescriptor<T>> {
    let mut out = Vec::new();
    let half: T = lit(0.5);
    for sq in [false, true] {
        if let Some(r) = inscribed_rectangle(dom, sq) {
            for p in [1, 2] {
                out.push(TrialDescriptor::Tensor {
                    g: Profile::poly((r.x0 + r.x1) * half, (r.x1 - r.x0) * half, p),
                    q: Profile::poly((r.y0 + r.y1) * half, (r.y1 - r.y0) * half, p),
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub eig: EigOptions,
    pub certificate: CertificateOptions,
    pub trial_tol: f64,
    /// Relative slack of every comparison.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { eig: EigOptions::default(), certificate: CertificateOptions::default(), trial_tol: 1e-8, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport<T> {
    pub label: String,
    pub s: T,
    pub k: usize,
    pub r_omega: T,
    pub lower_pipeline: T,
    pub lower_closed_form: T,
    pub eig: T,
    /// Smallest analytic trial quotient (`None` without a usable trial).
    pub upper: Option<T>,
    pub lower_le_eig: bool,
    pub lower_le_upper: bool,
    /// Diagnostic only: the discrete eigenvalue under the analytic trial bound.
    pub eig_le_upper: bool,
    pub heuristic: bool,
    pub verdict: Verdict,
    pub certificate: LowerBoundCertificate<T>,
}

/// Lower certificate, discrete eigenvalue and analytic upper bound for one
/// domain and order. PASS iff both lower bounds sit below the eigenvalue
/// and below the upper bound (relative slack `tol`).
pub fn verify_main_theorem<T: Real>(
    dom: &RasterDomain<T>,
    s: T,
    constants: &ConstantsTable<T>,
    opts: &VerifyOptions,
) -> Result<VerifyReport<T>> {
    let order = FractionalOrder::above_half(s)?;
    let cert = lower_bound_certificate(dom, s, constants, &opts.certificate)?.without_fatness();
    let eig = domain_eigenvalue(dom, order, false, &opts.eig)?.lambda;
    let mut upper: Option<T> = None;
    for t in default_trials(dom) {
        let v = rayleigh_upper_bound(&t, s, opts.trial_tol)?.value;
        upper = Some(upper.map_or(v, |u| u.min(v)));
    }
    let slack = T::one() + lit(opts.tol);
    let lower = cert.bound_pipeline.max(cert.bound_closed_form);
    let lower_le_eig = lower <= eig * slack;
    let lower_le_upper = upper.is_none_or(|u| lower <= u * slack);
    let eig_le_upper = upper.is_none_or(|u| eig <= u * slack);
    let verdict = if lower_le_eig && lower_le_upper { Verdict::Pass } else { Verdict::Fail };
    Ok(VerifyReport {
        label: dom.label.clone(),
        s,
        k: cert.k,
        r_omega: cert.r_omega,
        lower_pipeline: cert.bound_pipeline,
        lower_closed_form: cert.bound_closed_form,
        eig,
        upper,
        lower_le_eig,
        lower_le_upper,
        eig_le_upper,
        heuristic: cert.heuristic,
        verdict,
        certificate: cert,
    })
}
