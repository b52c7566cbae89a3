//! Test functions on the reference square `[-1, 1]²` used to estimate the
//! inexplicit constants.

use serde::{Deserialize, Serialize};

use crate::gagliardo::GridFunction;
use crate::geometry::{Point, RasterDomain};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusFn {
    /// `(1-x²)^p (1-y²)^p`.
    TensorBump { p: u32 },
    /// `(1 - |z-c|²/ρ²)₊²`.
    RadialBump { cx: f64, cy: f64, rho: f64 },
    /// `cos(π f x) (1-x²)² (1-y²)²`.
    Oscillatory { freq: f64 },
    /// `(1-x²)(1-y²)(1 - ζ((x-c)/ε))`, `ζ(t) = (1-|t|^β)₊`: vanishes on `x = c`.
    FunnelProduct { center: f64, eps: f64, beta: f64 },
}

impl CorpusFn {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if x.abs() >= 1.0 || y.abs() >= 1.0 {
            return 0.0;
        }
        let bx = 1.0 - x * x;
        let by = 1.0 - y * y;
        match *self {
            CorpusFn::TensorBump { p } => (bx * by).powi(p as i32),
            CorpusFn::RadialBump { cx, cy, rho } => {
                let d = ((x - cx).powi(2) + (y - cy).powi(2)) / (rho * rho);
                if d >= 1.0 {
                    0.0
                } else {
                    (1.0 - d).powi(2)
                }
            }
            CorpusFn::Oscillatory { freq } => (std::f64::consts::PI * freq * x).cos() * (bx * by).powi(2),
            CorpusFn::FunnelProduct { center, eps, beta } => {
                let t = ((x - center) / eps).abs();
                let z = if t >= 1.0 { 0.0 } else { 1.0 - t.powf(beta) };
                bx * by * (1.0 - z)
            }
        }
    }

    /// Samples `u((p - c)/scale)` at the nodes of `mask`.
    pub fn sample<T: Real>(&self, dom: &RasterDomain<T>, mask: &[bool], center: Point<T>, scale: T) -> GridFunction<T> {
        let (cx, cy, sc) = (center.x.to_f64_(), center.y.to_f64_(), scale.to_f64_());
        GridFunction::from_fn(dom, mask, |x, y| lit(self.eval((x.to_f64_() - cx) / sc, (y.to_f64_() - cy) / sc)))
    }

    /// Same, multiplied by a cut-off vanishing for `|x₁ - c₁| ≤ gap·scale`
    /// and equal to one beyond `2·gap·scale`.
    pub fn sample_away_from_axis<T: Real>(&self, dom: &RasterDomain<T>, mask: &[bool], center: Point<T>, scale: T, gap: f64) -> GridFunction<T> {
        let (cx, cy, sc) = (center.x.to_f64_(), center.y.to_f64_(), scale.to_f64_());
        GridFunction::from_fn(dom, mask, |x, y| {
            let (u, v) = ((x.to_f64_() - cx) / sc, (y.to_f64_() - cy) / sc);
            let cut = ((u.abs() - gap) / gap).clamp(0.0, 1.0);
            lit(cut * self.eval(u, v))
        })
    }
}

/// The twelve default functions: three tensor bumps, three off-centre
/// radial bumps, three oscillatory bumps and three funnel products.
pub fn default_corpus() -> Vec<CorpusFn> {
    vec![
        CorpusFn::TensorBump { p: 1 },
        CorpusFn::TensorBump { p: 2 },
        CorpusFn::TensorBump { p: 3 },
        CorpusFn::RadialBump { cx: 0.2, cy: -0.1, rho: 0.7 },
        CorpusFn::RadialBump { cx: -0.4, cy: 0.3, rho: 0.5 },
        CorpusFn::RadialBump { cx: 0.5, cy: 0.5, rho: 0.4 },
        CorpusFn::Oscillatory { freq: 1.0 },
        CorpusFn::Oscillatory { freq: 2.0 },
        CorpusFn::Oscillatory { freq: 3.0 },
        CorpusFn::FunnelProduct { center: 0.0, eps: 0.4, beta: 0.5 },
        CorpusFn::FunnelProduct { center: 0.3, eps: 0.3, beta: 0.3 },
        CorpusFn::FunnelProduct { center: -0.5, eps: 0.4, beta: 0.7 },
    ]
}
