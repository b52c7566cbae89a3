//! Rasters of the benchmark domains: the slug-shell sets `Ω_k`, finite
//! windows of the punctured comb `Θ_k`, and a few classical shapes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{topology_order, Point, RasterDomain};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `int(Shell_k ∪ Slug_k)` with its `k - 1` punctures.
    ShellSlug { k: usize },
    /// `(-W, W) × (-H, H)` minus the teeth `{(x, i) : |x| ≥ 1}`, `i ∈ ℤ`, and
    /// the punctures `(0, i)`, `i = 1..k-1`. `H` defaults to `max(W, k)`.
    CombWindow { k: usize, half_width: f64, half_height: Option<f64> },
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// `(0, side)²`.
    Square { side: f64 },
    /// `inner < |x| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// `(0, side)²` with `count` separated defects (alternately small holes
    /// and punctures) drawn from a seeded generator.
    RandomPerforated { seed: u64, count: usize, side: f64 },
}

/// A family member together with its raster spacing and padding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub h: f64,
    /// Extra outside margin (length units) beyond the mandatory ring.
    #[serde(default)]
    pub margin: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, h: f64) -> Self {
        Self { kind, h, margin: 0.0 }
    }

    /// The order `k` the construction is meant to have.
    pub fn expected_order(&self) -> Option<usize> {
        match self.kind {
            FamilyKind::ShellSlug { k } | FamilyKind::CombWindow { k, .. } => Some(k),
            FamilyKind::Disk { .. } | FamilyKind::Square { .. } => Some(1),
            FamilyKind::Annulus { .. } => Some(2),
            FamilyKind::RandomPerforated { count, .. } => Some(count + 1),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(m.to_string()));
        if !(self.h > 0.0) || !(self.margin >= 0.0) {
            return bad("h must be positive and the margin nonnegative");
        }
        match self.kind {
            FamilyKind::ShellSlug { k } if k < 2 => bad("shell-slug needs k ≥ 2"),
            FamilyKind::CombWindow { k, half_width, .. } if k < 1 || !(half_width > 1.0) => {
                bad("comb window needs k ≥ 1 and half-width > 1")
            }
            FamilyKind::Disk { radius } if !(radius > 0.0) => bad("radius must be positive"),
            FamilyKind::Square { side } if !(side > 0.0) => bad("side must be positive"),
            FamilyKind::Annulus { inner, outer } if !(0.0 < inner && inner < outer) => bad("need 0 < inner < outer"),
            FamilyKind::RandomPerforated { side, .. } if !(side > 1.0) => bad("side must exceed 1"),
            _ => Ok(()),
        }
    }
}

/// `n_k = ⌊√(k-1)⌋`, `m_k = (k-1) - n_k²`.
pub fn shell_slug_sizes(k: usize) -> (usize, usize) {
    let mut n = ((k - 1) as f64).sqrt() as usize;
    while n * n > k - 1 {
        n -= 1;
    }
    while (n + 1) * (n + 1) < k {
        n += 1;
    }
    (n, k - 1 - n * n)
}

/// Number of nodes per unit length when `1/h` is an even integer.
fn even_density(h: f64, what: &str) -> Result<i64> {
    let q = (1.0 / h).round();
    if ((1.0 / h) - q).abs() > 1e-9 * q || q < 2.0 || q as i64 % 2 != 0 {
        return Err(Error::Precondition(format!("{what} needs 1/h to be an even integer (got h = {h})")));
    }
    Ok(q as i64)
}

/// Integer lattice box `[i0, i1] × [j0, j1]` (node units) plus padding.
struct Frame {
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
}

impl Frame {
    fn covering(xmin: f64, xmax: f64, ymin: f64, ymax: f64, h: f64, margin: f64) -> Self {
        let pad = 1 + (margin / h).ceil() as i64;
        let i0 = (xmin / h - 1e-9).floor() as i64 - pad;
        let i1 = (xmax / h + 1e-9).ceil() as i64 + pad;
        let j0 = (ymin / h - 1e-9).floor() as i64 - pad;
        let j1 = (ymax / h + 1e-9).ceil() as i64 + pad;
        Frame { i0, j0, nx: (i1 - i0 + 1) as usize, ny: (j1 - j0 + 1) as usize }
    }

    fn raster<T: Real, F: Fn(i64, i64) -> bool>(&self, h: f64, inside: F) -> Result<RasterDomain<T>> {
        let mut mask = vec![false; self.nx * self.ny];
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                mask[j * self.nx + i] = inside(self.i0 + i as i64, self.j0 + j as i64);
            }
        }
        let origin = Point::new(lit(self.i0 as f64 * h), lit(self.j0 as f64 * h));
        RasterDomain::new(origin, lit(h), self.nx, self.ny, mask)
    }
}

fn puncture<T: Real>(dom: &mut RasterDomain<T>, x: f64, y: f64) -> Result<()> {
    dom.add_puncture(Point::new(lit(x), lit(y)))
}

/// Rasterises a family member; for the topological families the measured
/// order is checked against the requested one.
pub fn build_family<T: Real>(spec: &FamilySpec) -> Result<RasterDomain<T>> {
    spec.validate()?;
    let h = spec.h;
    let dom = match spec.kind {
        FamilyKind::ShellSlug { k } => {
            let q = even_density(h, "shell-slug")?;
            let (n, m) = shell_slug_sizes(k);
            let (nq, mq) = (n as i64 * q, m as i64 * q);
            let shared = n.min(m) as i64 * q;
            let frame = Frame::covering(0.0, n.max(m) as f64, if m > 0 { -1.0 } else { 0.0 }, n as f64, h, spec.margin);
            let mut dom = frame.raster::<T, _>(h, |i, j| {
                (0 < i && i < nq && 0 < j && j < nq) || (0 < i && i < mq && -q < j && j < 0) || (j == 0 && 0 < i && i < shared)
            })?;
            for i in 0..n {
                for j in 0..n {
                    puncture(&mut dom, i as f64 + 0.5, j as f64 + 0.5)?;
                }
            }
            for i in 0..m {
                puncture(&mut dom, i as f64 + 0.5, -0.5)?;
            }
            dom.with_label(format!("shell_slug k={k} n={n} m={m}"))
        }
        FamilyKind::CombWindow { k, half_width, half_height } => {
            let q = even_density(h, "comb window")?;
            let height = half_height.unwrap_or(half_width.max(k as f64));
            if !(height > (k - 1) as f64) {
                return Err(Error::Precondition(format!(
                    "comb window of half-height {height} cannot hold the punctures (0, 1..{})",
                    k - 1
                )));
            }
            let wq = (half_width * q as f64).round() as i64;
            let hq = (height * q as f64).round() as i64;
            let frame = Frame::covering(-half_width, half_width, -height, height, h, spec.margin);
            let mut dom = frame.raster::<T, _>(h, |i, j| i.abs() < wq && j.abs() < hq && !(j % q == 0 && i.abs() >= q))?;
            for i in 1..k {
                puncture(&mut dom, 0.0, i as f64)?;
            }
            dom.with_label(format!("comb_window k={k} W={half_width} H={height}"))
        }
        FamilyKind::Disk { radius } => {
            let frame = Frame::covering(-radius, radius, -radius, radius, h, spec.margin);
            let r2 = radius * radius;
            frame
                .raster::<T, _>(h, |i, j| {
                    let (x, y) = (i as f64 * h, j as f64 * h);
                    x * x + y * y < r2
                })?
                .with_label(format!("disk R={radius}"))
        }
        FamilyKind::Square { side } => {
            let frame = Frame::covering(0.0, side, 0.0, side, h, spec.margin);
            frame
                .raster::<T, _>(h, |i, j| {
                    let (x, y) = (i as f64 * h, j as f64 * h);
                    x > 1e-12 && y > 1e-12 && x < side - 1e-12 && y < side - 1e-12
                })?
                .with_label(format!("square side={side}"))
        }
        FamilyKind::Annulus { inner, outer } => {
            let frame = Frame::covering(-outer, outer, -outer, outer, h, spec.margin);
            let (a2, b2) = (inner * inner, outer * outer);
            frame
                .raster::<T, _>(h, |i, j| {
                    let (x, y) = (i as f64 * h, j as f64 * h);
                    let d = x * x + y * y;
                    a2 < d && d < b2
                })?
                .with_label(format!("annulus {inner} < |x| < {outer}"))
        }
        FamilyKind::RandomPerforated { seed, count, side } => random_perforated(seed, count, side, h, spec.margin)?,
    };
    if let Some(k) = spec.expected_order() {
        let got = topology_order(&dom).k;
        if got != k {
            return Err(Error::Precondition(format!(
                "{}: measured order {got} differs from the requested {k}; refine h or enlarge the window",
                dom.label
            )));
        }
    }
    dom.validate()?;
    Ok(dom)
}

fn random_perforated<T: Real>(seed: u64, count: usize, side: f64, h: f64, margin: f64) -> Result<RasterDomain<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // defect centres snapped to nodes, pairwise separated and away from the sides
    let sep = 0.4_f64.max(4.0 * h);
    let rmax = (0.25 * sep).max(0.5 * h);
    let lo = 0.5_f64.max(rmax + 2.0 * h);
    if side - 2.0 * lo <= 0.0 {
        return Err(Error::Precondition("square too small for the defects".into()));
    }
    let mut defects: Vec<(f64, f64, f64)> = Vec::with_capacity(count);
    let mut attempts = 0;
    while defects.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Precondition(format!("could not place {count} separated defects")));
        }
        let x = (rng.gen_range(lo..side - lo) / h).round() * h;
        let y = (rng.gen_range(lo..side - lo) / h).round() * h;
        if defects.iter().any(|&(a, b, _)| (a - x).hypot(b - y) < sep) {
            continue;
        }
        // even slots: a hole of radius in [h, rmax]; odd slots: a puncture
        let r = if defects.len() % 2 == 0 { rng.gen_range(h..=rmax.max(h)) } else { 0.0 };
        defects.push((x, y, r));
    }
    let frame = Frame::covering(0.0, side, 0.0, side, h, margin);
    let holes: Vec<(f64, f64, f64)> = defects.iter().copied().filter(|d| d.2 > 0.0).collect();
    let mut dom = frame.raster::<T, _>(h, |i, j| {
        let (x, y) = (i as f64 * h, j as f64 * h);
        let in_square = x > 1e-12 && y > 1e-12 && x < side - 1e-12 && y < side - 1e-12;
        // a hole always contains at least its own (node) centre
        in_square && !holes.iter().any(|&(a, b, r)| (x - a).hypot(y - b) < r.max(1e-9 * h) + 1e-12)
    })?;
    for &(x, y, r) in &defects {
        if r == 0.0 {
            puncture(&mut dom, x, y)?;
        }
    }
    Ok(dom.with_label(format!("random_perforated seed={seed} count={count} side={side}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::inradius;

    #[test]
    fn sizes() {
        assert_eq!(shell_slug_sizes(25), (4, 8));
        assert_eq!(shell_slug_sizes(2), (1, 0));
        assert_eq!(shell_slug_sizes(5), (2, 0));
        assert_eq!(shell_slug_sizes(4), (1, 2));
    }

    #[test]
    fn shell_slug_orders_and_inradius() {
        for k in [2, 3, 4, 7, 9, 16, 25] {
            let d: RasterDomain<f64> = build_family(&FamilySpec::new(FamilyKind::ShellSlug { k }, 1.0 / 16.0)).unwrap();
            assert_eq!(topology_order(&d).k, k);
            assert_eq!(d.punctures.len(), k - 1);
            assert!(inradius(&d).unwrap() <= 0.5f64.sqrt() + 2.0 / 16.0);
        }
    }

    #[test]
    fn comb_window_punctures() {
        let spec = FamilySpec::new(FamilyKind::CombWindow { k: 4, half_width: 8.0, half_height: None }, 0.25);
        let d: RasterDomain<f64> = build_family(&spec).unwrap();
        let pts: Vec<(f64, f64)> = d.punctures.iter().map(|p| (p.point.x, p.point.y)).collect();
        assert_eq!(pts, vec![(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)]);
        let small = FamilySpec::new(FamilyKind::CombWindow { k: 4, half_width: 8.0, half_height: Some(2.5) }, 0.25);
        assert!(build_family::<f64>(&small).is_err());
    }

    #[test]
    fn classical_shapes_and_random() {
        for kind in [
            FamilyKind::Disk { radius: 1.0 },
            FamilyKind::Square { side: 1.0 },
            FamilyKind::Annulus { inner: 0.4, outer: 1.0 },
        ] {
            build_family::<f64>(&FamilySpec::new(kind, 1.0 / 32.0)).unwrap();
        }
        for seed in 0..5 {
            let spec = FamilySpec::new(FamilyKind::RandomPerforated { seed, count: 6, side: 4.0 }, 1.0 / 16.0);
            let a: RasterDomain<f64> = build_family(&spec).unwrap();
            let b: RasterDomain<f64> = build_family(&spec).unwrap();
            assert_eq!(a, b);
        }
    }
}
