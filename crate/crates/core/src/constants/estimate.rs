//! Corpus envelopes for `𝒜`, `ℳ` and `φ(2, 2)`.

use serde::Serialize;

use super::corpus::CorpusFn;
use super::{Entry, Provenance};
use crate::capacity::{capacity, mazya_report, CapacityOptions, MazyaSetup};
use crate::error::{Error, Result};
use crate::gagliardo::{average, axis_seminorms, FractionalOrder, GridOperator, NonlocalForm};
use crate::geometry::{Point, RasterDomain};
use crate::scalar::{lit, Real};

/// Resolution and safety margins of the estimators.
#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions {
    /// Nodes per unit length (the reference radius is 1).
    pub cells_per_unit: usize,
    /// Envelopes are inflated (or deflated, for `φ`) by this factor.
    pub safety: f64,
    /// `R/r` of the Maz'ya configuration.
    pub radius_ratio: f64,
    pub capacity: CapacityOptions,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { cells_per_unit: 8, safety: 1.1, radius_ratio: 2.0, capacity: CapacityOptions::default() }
    }
}

/// An envelope estimate with its raw extreme and per-member values.
#[derive(Clone, Debug, Serialize)]
pub struct Estimated<T> {
    /// Envelope after the safety factor.
    pub value: T,
    /// Extreme ratio over the corpus and order grid.
    pub raw: T,
    pub corpus: usize,
    /// Extreme over the order grid, per corpus member (`None` when skipped).
    pub members: Vec<Option<T>>,
}

impl<T: Real> Estimated<T> {
    pub fn entry(&self) -> Entry<T> {
        Entry::new(self.value, Provenance::Estimated { corpus: self.corpus })
    }
}

fn square_grid<T: Real>(half: f64, cells_per_unit: usize) -> Result<RasterDomain<T>> {
    let h = 1.0 / cells_per_unit as f64;
    let n = (2.0 * half / h).round() as usize + 1;
    let o = Point::new(lit(-half), lit(-half));
    RasterDomain::from_fn(o, lit(h), n, n, |_, _| true)
}

fn node_mask<T: Real, F: Fn(f64, f64) -> bool>(dom: &RasterDomain<T>, f: F) -> Vec<bool> {
    let mut m = vec![false; dom.nx * dom.ny];
    for j in 0..dom.ny {
        for i in 0..dom.nx {
            let p = dom.node_point(i, j);
            m[dom.index(i, j)] = dom.inside(i, j) && f(p.x.to_f64_(), p.y.to_f64_());
        }
    }
    m
}

fn check_inputs<T: Real>(corpus: &[CorpusFn], s_grid: &[T]) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::EmptySet("corpus"));
    }
    if s_grid.is_empty() {
        return Err(Error::EmptySet("order grid"));
    }
    Ok(())
}

fn envelope<T: Real>(members: Vec<Option<T>>, maximise: bool, safety: f64, corpus: usize) -> Result<Estimated<T>> {
    let raw = members.iter().flatten().copied().reduce(|a, b| if maximise == (b > a) { b } else { a });
    let raw = raw.ok_or(Error::EmptySet("every corpus member was skipped"))?;
    let value = if maximise { raw * lit(safety) } else { raw / lit(safety) };
    Ok(Estimated { value, raw, corpus, members })
}

/// `𝒜̂`: largest ratio of an axis-directional seminorm to the full one.
pub fn estimate_a_dir<T: Real>(corpus: &[CorpusFn], s_grid: &[T], opts: &EstimateOptions) -> Result<Estimated<T>> {
    check_inputs(corpus, s_grid)?;
    let dom = square_grid::<T>(1.25, opts.cells_per_unit)?;
    let mask = dom.active_mask(false);
    let mut members = vec![None; corpus.len()];
    for &s in s_grid {
        let op = GridOperator::for_domain(&dom, FractionalOrder::new(s)?);
        let form = NonlocalForm::full(op, &mask)?;
        for (k, f) in corpus.iter().enumerate() {
            let u = f.sample(&dom, &mask, Point::origin(), T::one());
            let full = form.evaluate(&u)?;
            if full == T::zero() {
                continue;
            }
            let (a, b) = axis_seminorms(&u, dom.h, s);
            let r = a.max(b) / full;
            members[k] = Some(members[k].map_or(r, |m: T| m.max(r)));
        }
    }
    envelope(members, true, opts.safety, corpus.len())
}

/// `ℳ̂`: largest `‖u - av_B u‖² / ((1-s) r^{2s} [u]²_{B_r})` on the unit disk.
pub fn estimate_m_pw<T: Real>(corpus: &[CorpusFn], s_grid: &[T], opts: &EstimateOptions) -> Result<Estimated<T>> {
    check_inputs(corpus, s_grid)?;
    let dom = square_grid::<T>(1.25, opts.cells_per_unit)?;
    let mask = dom.active_mask(false);
    let disk = node_mask(&dom, |x, y| x * x + y * y < 1.0);
    let mut members = vec![None; corpus.len()];
    for &s in s_grid {
        let op = GridOperator::for_domain(&dom, FractionalOrder::new(s)?);
        let form = NonlocalForm::regional(op, &disk)?;
        for (k, f) in corpus.iter().enumerate() {
            let u = f.sample(&dom, &mask, Point::origin(), T::one());
            let av = average(&u, &disk)?;
            let x = form.gather(&u)?;
            let dev: Vec<T> = x.iter().map(|&v| v - av).collect();
            let num = form.mass_norm2(&dev);
            let den = (T::one() - s) * form.evaluate_vec(&x);
            if den == T::zero() {
                continue;
            }
            let r = num / den;
            members[k] = Some(members[k].map_or(r, |m: T| m.max(r)));
        }
    }
    envelope(members, true, opts.safety, corpus.len())
}

/// `φ̂`: smallest `r²[u]²_{Q_r} / (s cap(Σ; B_R) ‖u‖²)` with `Σ` the vertical
/// mid-segment of `Q_r`, `r = 1`, over functions vanishing near `Σ`.
pub fn estimate_phi22<T: Real>(corpus: &[CorpusFn], s_grid: &[T], opts: &EstimateOptions) -> Result<Estimated<T>> {
    check_inputs(corpus, s_grid)?;
    let big_r = opts.radius_ratio;
    if !(big_r > std::f64::consts::SQRT_2) {
        return Err(Error::Precondition("R/r must exceed √2 so that B_R contains Q_r".into()));
    }
    let dom = square_grid::<T>(big_r + 0.5, opts.cells_per_unit)?;
    let h = dom.h.to_f64_();
    let eps = 1e-9;
    let square = node_mask(&dom, |x, y| x.abs() <= 1.0 + eps && y.abs() <= 1.0 + eps);
    let sigma = node_mask(&dom, |x, y| x.abs() <= eps && y.abs() <= 1.0 + eps);
    let disk = node_mask(&dom, |x, y| x * x + y * y < big_r * big_r);
    let gap = (2.0 * h).max(0.2);
    let mut members = vec![None; corpus.len()];
    for &s in s_grid {
        let op = GridOperator::for_domain(&dom, FractionalOrder::new(s)?);
        let cap = capacity(op.clone(), &sigma, &disk, &opts.capacity)?.value;
        let setup = MazyaSetup { op, square: &square, sigma: &sigma, disk: &disk, r: T::one() };
        for (k, f) in corpus.iter().enumerate() {
            let u = f.sample_away_from_axis(&dom, &square, Point::origin(), T::one(), gap);
            if let Some(r) = mazya_report(&u, &setup, cap)?.ratio {
                members[k] = Some(members[k].map_or(r, |m: T| m.min(r)));
            }
        }
    }
    envelope(members, false, opts.safety, corpus.len())
}
