//! Constructive fatness of the complement: inside an axis-parallel tile of
//! side `10δ r_Ω` (`δ = ⌊√k⌋ + 1`) the complement contains a compact set
//! whose longer axis projection is at least `√k r_Ω / 4`.
//!
//! Everything runs on the domain's node lattice extended to all of `ℤ²`:
//! nodes off the raster and puncture nodes belong to the complement.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{inradius, project_points, topology_order, Direction, Point, ProjectionResult, RasterDomain};
use crate::scalar::{lit, Real};

/// Signed lattice coordinates `(i, j)` of the node `origin + h·(i, j)`.
pub type Node = (i64, i64);

/// `δ = ⌊√k⌋ + 1`.
pub fn delta(k: usize) -> usize {
    isqrt(k) + 1
}

fn isqrt(k: usize) -> usize {
    let mut r = (k as f64).sqrt() as usize;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// Guaranteed number of distinct unit projections, `Λ_k ≥ √k / 4`.
pub fn lambda_k(k: usize) -> usize {
    let q = isqrt(k);
    match k {
        0..=3 => 1,
        _ if q % 2 == 0 => q / 2,
        _ => (q - 1) / 2,
    }
}

/// The `4δ²` cell centres, indexed `(j, m)` with `j` running left to right
/// and `m` top to bottom; returned in row-major order of `(m, j)`.
pub fn tile_centers<T: Real>(k: usize, r: T, tile_center: Point<T>) -> Result<Vec<((usize, usize), Point<T>)>> {
    if k == 0 {
        return Err(Error::Precondition("order k must be at least 1".into()));
    }
    centers_for_delta(delta(k), r, tile_center)
}

/// Cell centres `r·(-5δ + 5/2 + 5j, 5δ - 5/2 - 5m) + c` for a given `δ ≥ 1`.
pub fn centers_for_delta<T: Real>(d: usize, r: T, tile_center: Point<T>) -> Result<Vec<((usize, usize), Point<T>)>> {
    if d == 0 {
        return Err(Error::Precondition("δ must be at least 1".into()));
    }
    if !(r > T::zero()) {
        return Err(Error::Precondition("inradius must be positive".into()));
    }
    let df = lit::<T>(d as f64);
    let five = lit::<T>(5.0);
    let half = lit::<T>(2.5);
    let mut out = Vec::with_capacity(4 * d * d);
    for m in 0..2 * d {
        for j in 0..2 * d {
            let x = -five * df + half + five * lit(j as f64);
            let y = five * df - half - five * lit(m as f64);
            out.push(((j, m), Point::new(tile_center.x + r * x, tile_center.y + r * y)));
        }
    }
    Ok(out)
}

/// Outcome for one cell `Q_{5r/2}(P_{j,m})`.
#[derive(Clone, Debug, Serialize)]
pub struct CellReport<T> {
    pub index: (usize, usize),
    pub center: Point<T>,
    pub witness: Point<T>,
    pub witness_node: Node,
    pub reliable: bool,
    /// The clipped complement component of the witness (empty when unreliable).
    #[serde(skip)]
    pub continuum: Vec<Node>,
    /// Axis projection lengths of the continuum.
    pub extent: (T, T),
}

/// Complement membership on the infinite lattice.
struct Lattice<'a, T> {
    dom: &'a RasterDomain<T>,
    punctures: HashSet<Node>,
}

impl<'a, T: Real> Lattice<'a, T> {
    fn new(dom: &'a RasterDomain<T>) -> Self {
        let punctures = dom.punctures.iter().map(|p| (p.node.0 as i64, p.node.1 as i64)).collect();
        Self { dom, punctures }
    }

    fn complement(&self, n: Node) -> bool {
        !self.dom.inside_signed(n.0, n.1) || self.punctures.contains(&n)
    }

    fn point(&self, n: Node) -> Point<T> {
        let h = self.dom.h;
        Point::new(
            self.dom.origin.x + h * T::from_i64(n.0).unwrap(),
            self.dom.origin.y + h * T::from_i64(n.1).unwrap(),
        )
    }

    /// Node index range covering the closed interval `[a, b]` along one axis.
    fn range(&self, a: T, b: T, axis: usize) -> (i64, i64) {
        let o = if axis == 0 { self.dom.origin.x } else { self.dom.origin.y };
        let h = self.dom.h;
        let eps = lit::<T>(1e-9);
        let lo = ((a - o) / h - eps).ceil().to_f64_() as i64;
        let hi = ((b - o) / h + eps).floor().to_f64_() as i64;
        (lo, hi)
    }
}

fn classify_cell<T: Real>(lat: &Lattice<'_, T>, index: (usize, usize), p: Point<T>, r: T) -> Result<CellReport<T>> {
    let h = lat.dom.h;
    let rad = r * lit(1.5);
    let rad2 = rad * rad * (T::one() + lit(1e-12));
    let (wx0, wx1) = lat.range(p.x - rad, p.x + rad, 0);
    let (wy0, wy1) = lat.range(p.y - rad, p.y + rad, 1);
    // lexicographically smallest complement node in the closed witness disk
    let mut witness = None;
    'search: for i in wx0..=wx1 {
        for j in wy0..=wy1 {
            let n = (i, j);
            let q = lat.point(n);
            let d = Point::new(q.x - p.x, q.y - p.y);
            if d.dot(d) <= rad2 && lat.complement(n) {
                witness = Some(n);
                break 'search;
            }
        }
    }
    let w = witness.ok_or(Error::NoWitness(index.0, index.1))?;

    let half = r * lit(2.5);
    let (ci0, ci1) = lat.range(p.x - half, p.x + half, 0);
    let (cj0, cj1) = lat.range(p.y - half, p.y + half, 1);
    let wdt = (ci1 - ci0 + 1) as usize;
    let hgt = (cj1 - cj0 + 1) as usize;
    let mut seen = vec![false; wdt * hgt];
    let local = |n: Node| (n.1 - cj0) as usize * wdt + (n.0 - ci0) as usize;
    let mut comp = Vec::new();
    let mut stack = vec![w];
    seen[local(w)] = true;
    let mut touches = false;
    while let Some(n) = stack.pop() {
        comp.push(n);
        if n.0 == ci0 || n.0 == ci1 || n.1 == cj0 || n.1 == cj1 {
            touches = true;
        }
        for di in -1..=1 {
            for dj in -1..=1 {
                let m = (n.0 + di, n.1 + dj);
                if (di, dj) == (0, 0) || m.0 < ci0 || m.0 > ci1 || m.1 < cj0 || m.1 > cj1 {
                    continue;
                }
                let l = local(m);
                if !seen[l] && lat.complement(m) {
                    seen[l] = true;
                    stack.push(m);
                }
            }
        }
    }
    comp.sort_unstable();
    let span = |f: fn(&Node) -> i64| {
        let lo = comp.iter().map(f).min().unwrap();
        let hi = comp.iter().map(f).max().unwrap();
        h * T::from_i64(hi - lo + 1).unwrap()
    };
    let extent = if touches { (span(|n| n.1), span(|n| n.0)) } else { (T::zero(), T::zero()) };
    Ok(CellReport {
        index,
        center: p,
        witness: lat.point(w),
        witness_node: w,
        reliable: touches,
        continuum: if touches { comp } else { Vec::new() },
        extent,
    })
}

/// Picks witnesses and decides reliability of every cell (parallel over cells,
/// output in the order of `centers`).
pub fn classify_cells<T: Real>(dom: &RasterDomain<T>, centers: &[((usize, usize), Point<T>)], r: T) -> Result<Vec<CellReport<T>>> {
    let lat = Lattice::new(dom);
    centers.par_iter().map(|&(idx, p)| classify_cell(&lat, idx, p, r)).collect()
}

/// Output of the fatness construction for one tile.
#[derive(Clone, Debug, Serialize)]
pub struct FatnessCertificate<T> {
    pub k: usize,
    pub delta: usize,
    pub r: T,
    pub h: T,
    pub tile_center: Point<T>,
    pub tile_side: T,
    /// Raster origin: node `(i, j)` of `Σ` sits at `lattice_origin + h·(i, j)`.
    pub lattice_origin: Point<T>,
    pub cells: Vec<CellReport<T>>,
    /// True when the tile misses the domain and `Σ` is the whole closed tile.
    pub trivial: bool,
    /// `Σ`, sorted by `(j, i)`.
    #[serde(skip)]
    pub sigma: Vec<Node>,
    /// Projection on the first axis line (`Π_{e₁}`, parametrised by `y`).
    pub proj_e1: ProjectionResult<T>,
    /// Projection on the second axis line (`Π_{e₂}`, parametrised by `x`).
    pub proj_e2: ProjectionResult<T>,
    /// `√k r / 4`.
    pub bound: T,
}

impl<T: Real> FatnessCertificate<T> {
    pub fn reliable(&self) -> Vec<(usize, usize)> {
        self.cells.iter().filter(|c| c.reliable).map(|c| c.index).collect()
    }

    pub fn max_projection(&self) -> T {
        self.proj_e1.length.max(self.proj_e2.length)
    }

    /// The projection inequality with the rasterisation slack `2h`.
    pub fn holds(&self) -> bool {
        self.max_projection() >= self.bound - self.h - self.h
    }

    pub fn sigma_points(&self) -> Vec<Point<T>> {
        let h = self.h;
        let o = self.origin();
        self.sigma
            .iter()
            .map(|&(i, j)| Point::new(o.x + h * T::from_i64(i).unwrap(), o.y + h * T::from_i64(j).unwrap()))
            .collect()
    }

    fn origin(&self) -> Point<T> {
        self.lattice_origin
    }

    /// `Σ` as run-length rows: `(j, [(i_start, length), …])`.
    pub fn sigma_rows(&self) -> Vec<(i64, Vec<(i64, usize)>)> {
        let mut rows: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
        for &(i, j) in &self.sigma {
            let row = rows.entry(j).or_default();
            match row.last_mut() {
                Some((start, len)) if *start + *len as i64 == i => *len += 1,
                _ => row.push((i, 1)),
            }
        }
        rows.into_iter().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let o = self.origin();
        let v = serde_json::json!({
            "k": self.k,
            "delta": self.delta,
            "r": self.r.to_f64_(),
            "h": self.h.to_f64_(),
            "origin": [o.x.to_f64_(), o.y.to_f64_()],
            "tile": {
                "center": [self.tile_center.x.to_f64_(), self.tile_center.y.to_f64_()],
                "side": self.tile_side.to_f64_(),
            },
            "trivial": self.trivial,
            "centers": self.cells.iter().map(|c| serde_json::json!({
                "j": c.index.0,
                "m": c.index.1,
                "center": [c.center.x.to_f64_(), c.center.y.to_f64_()],
                "witness": [c.witness.x.to_f64_(), c.witness.y.to_f64_()],
                "reliable": c.reliable,
                "extent": [c.extent.0.to_f64_(), c.extent.1.to_f64_()],
            })).collect::<Vec<_>>(),
            "reliable": self.reliable(),
            "sigma_rows": self.sigma_rows().into_iter().map(|(j, runs)| serde_json::json!({
                "j": j,
                "runs": runs,
            })).collect::<Vec<_>>(),
            "proj_e1": self.proj_e1.length.to_f64_(),
            "proj_e2": self.proj_e2.length.to_f64_(),
            "bound": self.bound.to_f64_(),
            "holds": self.holds(),
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// Tile, cells, witness disks, `Σ` and the domain's inside nodes as SVG.
    pub fn to_svg(&self, dom: &RasterDomain<T>) -> String {
        let size = 640.0;
        let side = self.tile_side.to_f64_();
        let (cx, cy) = (self.tile_center.x.to_f64_(), self.tile_center.y.to_f64_());
        let sc = size / side;
        let px = |x: f64| (x - (cx - side / 2.0)) * sc;
        let py = |y: f64| ((cy + side / 2.0) - y) * sc;
        let h = self.h.to_f64_();
        let r = self.r.to_f64_();
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>"#);
        let dot = (h * sc).max(0.5);
        for j in 0..dom.ny {
            for i in 0..dom.nx {
                if dom.inside(i, j) {
                    let p = dom.node_point(i, j);
                    let (x, y) = (p.x.to_f64_(), p.y.to_f64_());
                    if (x - cx).abs() <= side / 2.0 && (y - cy).abs() <= side / 2.0 {
                        let _ = writeln!(s, r##"<rect x="{:.2}" y="{:.2}" width="{dot:.2}" height="{dot:.2}" fill="#9ecae1"/>"##, px(x) - dot / 2.0, py(y) - dot / 2.0);
                    }
                }
            }
        }
        let o = self.origin();
        let (ox, oy) = (o.x.to_f64_(), o.y.to_f64_());
        for (j, runs) in self.sigma_rows() {
            let y = oy + h * j as f64;
            for (i0, len) in runs {
                let x0 = ox + h * i0 as f64 - h / 2.0;
                let w = len as f64 * h * sc;
                let _ = writeln!(s, r##"<rect x="{:.2}" y="{:.2}" width="{w:.2}" height="{dot:.2}" fill="#333333"/>"##, px(x0), py(y) - dot / 2.0);
            }
        }
        for c in &self.cells {
            let (x, y) = (c.center.x.to_f64_(), c.center.y.to_f64_());
            let q = 2.5 * r * sc;
            let colour = if c.reliable { "#2ca02c" } else { "#d62728" };
            let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{colour}" stroke-width="0.8"/>"#, px(x) - q, py(y) - q, 2.0 * q, 2.0 * q);
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="gray" stroke-dasharray="3,2"/>"#, px(x), py(y), 1.5 * r * sc);
            let (wx, wy) = (c.witness.x.to_f64_(), c.witness.y.to_f64_());
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="red"/>"#, px(wx), py(wy));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Runs the construction with the measured order and inradius of `dom`.
pub fn fatness_certificate<T: Real>(dom: &RasterDomain<T>, tile_center: Point<T>) -> Result<FatnessCertificate<T>> {
    let k = topology_order(dom).k;
    let r = inradius(dom)?;
    fatness_certificate_with(dom, tile_center, k, r)
}

/// Runs the construction for a given order `k` and radius `r`.
pub fn fatness_certificate_with<T: Real>(dom: &RasterDomain<T>, tile_center: Point<T>, k: usize, r: T) -> Result<FatnessCertificate<T>> {
    let d = delta(k);
    let side = r * lit(10.0 * d as f64);
    let lat = Lattice::new(dom);
    let half = side * lit(0.5);
    let (ti0, ti1) = lat.range(tile_center.x - half, tile_center.x + half, 0);
    let (tj0, tj1) = lat.range(tile_center.y - half, tile_center.y + half, 1);
    let bound = lit::<T>((k as f64).sqrt() / 4.0) * r;
    let centers = tile_centers(k, r, tile_center)?;

    let meets = (ti0.max(0)..=ti1.min(dom.nx as i64 - 1))
        .any(|i| (tj0.max(0)..=tj1.min(dom.ny as i64 - 1)).any(|j| dom.inside(i as usize, j as usize)));
    let (cells, sigma, trivial) = if meets {
        let cells = classify_cells(dom, &centers, r)?;
        let mut sigma: Vec<Node> = cells.iter().flat_map(|c| c.continuum.iter().copied()).collect();
        sigma.sort_unstable_by_key(|&(i, j)| (j, i));
        sigma.dedup();
        (cells, sigma, false)
    } else {
        let mut sigma = Vec::new();
        for j in tj0..=tj1 {
            for i in ti0..=ti1 {
                sigma.push((i, j));
            }
        }
        (Vec::new(), sigma, true)
    };

    let pts: Vec<Point<T>> = sigma.iter().map(|&n| lat.point(n)).collect();
    let (proj_e1, proj_e2) = if trivial {
        // the closed tile projects onto a segment of exactly its side
        let full = |dir| ProjectionResult {
            direction: dir,
            intervals: vec![(T::zero(), side)],
            length: side,
            approximate: false,
        };
        (full(Direction::e1()), full(Direction::e2()))
    } else {
        (project_points(&pts, dom.h, Direction::e1()), project_points(&pts, dom.h, Direction::e2()))
    };
    Ok(FatnessCertificate {
        k,
        delta: d,
        r,
        h: dom.h,
        tile_center,
        tile_side: side,
        lattice_origin: dom.origin,
        cells,
        trivial,
        sigma,
        proj_e1,
        proj_e2,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_and_lambda() {
        assert_eq!(delta(1), 2);
        assert_eq!(delta(3), 2);
        assert_eq!(delta(4), 3);
        assert_eq!(delta(16), 5);
        for (k, l) in [(1, 1), (2, 1), (3, 1), (4, 1), (9, 1), (16, 2), (36, 3)] {
            assert_eq!(lambda_k(k), l, "k = {k}");
        }
        for k in 1..500 {
            assert!(lambda_k(k) as f64 >= (k as f64).sqrt() / 4.0, "k = {k}");
            assert!(2 * lambda_k(k) <= delta(k), "k = {k}");
        }
    }

    #[test]
    fn centers_layout() {
        let c = tile_centers::<f64>(3, 1.0, Point::origin()).unwrap();
        assert_eq!(c.len(), 16);
        let c = centers_for_delta::<f64>(1, 1.0, Point::origin()).unwrap();
        assert_eq!(c[0].0, (0, 0));
        assert_eq!((c[0].1.x, c[0].1.y), (-2.5, 2.5));
        let c = tile_centers::<f64>(1, 1.0, Point::origin()).unwrap();
        assert_eq!((c[0].1.x, c[0].1.y), (-7.5, 7.5));
        assert_eq!(tile_centers::<f64>(4, 1.0, Point::origin()).unwrap().len(), 36);
    }

    #[test]
    fn crossing_lines_make_every_cell_reliable() {
        // complement = horizontal lines y ∈ 2ℤ, each crossing whole cell rows
        let h = 0.25;
        let dom = RasterDomain::from_fn(Point::new(-20.0, -20.0), h, 161, 161, |_, y: f64| y.rem_euclid(2.0) != 0.0).unwrap();
        let cert = fatness_certificate_with(&dom, Point::new(0.0, 0.0), 1, 1.0).unwrap();
        assert_eq!(cert.reliable().len(), 16);
        assert!(cert.holds());
    }

    #[test]
    fn isolated_points_are_unreliable() {
        // complement = one point per cell centre (plus the far frame)
        let h = 0.25;
        let mut dom = RasterDomain::from_fn(Point::new(-20.0, -20.0), h, 161, 161, |_, _| true).unwrap();
        let centers = tile_centers(1, 1.0, Point::origin()).unwrap();
        for (_, p) in &centers {
            dom.add_puncture(*p).unwrap();
        }
        let cells = classify_cells(&dom, &centers, 1.0).unwrap();
        assert!(cells.iter().all(|c| !c.reliable));
    }
}
