//! The tiling argument behind the eigenvalue lower bound.
//!
//! After rescaling to `r_Ω = 1`, the plane is tiled by the open squares
//! `𝒬_{i,j} = Q_{5δ}(10δ i, 10δ j)`. Every tile meeting `Ω` receives a
//! fatness set `Σ_{i,j}`, a lower bound for `cap(Σ_{i,j}; B_{R}(centre))`
//! and, through the Maz'ya-type inequality, the tile estimate
//! `[u]²_{𝒬} ≥ (s / (5δ)²) φ cap ‖u‖²_{𝒬}`. The smallest tile estimate bounds
//! `λ₁ˢ(Ω)` from below; scaling back multiplies it by `r_Ω^{-2s}`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity, projection_rhs, CapacityOptions, ChordBound};
use crate::constants::{ConstantsTable, Entry};
use crate::error::{Error, Result};
use crate::fatness::{delta, fatness_certificate_with, FatnessCertificate};
use crate::gagliardo::{FractionalOrder, GridOperator};
use crate::geometry::{inradius, topology_order, Point, RasterDomain};
use crate::scalar::{lit, Real};

/// How the per-tile capacity is bounded from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityPath {
    /// Projection bound with the guaranteed projection `√k / 4`.
    Analytic,
    /// Direct obstacle solve on the normalised grid (tighter, but a discrete
    /// capacity over-estimates the continuum one).
    Qp,
}

impl std::str::FromStr for CapacityPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "qp" => Ok(Self::Qp),
            _ => Err(Error::Parse { line: 0, msg: format!("unknown capacity path `{s}`") }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertificateOptions {
    pub path: CapacityPath,
    pub chord: ChordBound,
    /// `R / r` in the Maz'ya inequality (`r = 5δ` is the tile half-side).
    pub radius_ratio: f64,
    pub capacity: CapacityOptions,
    /// The QP path falls back to the analytic one above this many unknowns.
    pub qp_max_unknowns: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            path: CapacityPath::Analytic,
            chord: ChordBound::Stated,
            radius_ratio: 2.0,
            capacity: CapacityOptions::default(),
            qp_max_unknowns: 40_000,
        }
    }
}

/// One tile of the certificate (normalised units, `r_Ω = 1`).
#[derive(Clone, Debug, Serialize)]
pub struct TileRecord<T> {
    pub index: (i64, i64),
    pub center: Point<T>,
    pub sigma_nodes: usize,
    pub reliable_cells: usize,
    pub proj_e1: T,
    pub proj_e2: T,
    /// `max projection ≥ √k/4 - 2h` on the raster.
    pub fatness_holds: bool,
    pub capacity_lower: T,
    pub path_used: CapacityPath,
    /// `(s / (5δ)²) φ cap`.
    pub tile_bound: T,
    #[serde(skip)]
    pub fatness: Option<FatnessCertificate<T>>,
}

/// Snapshot of the constants that entered a certificate.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsUsed<T> {
    pub morrey_m: T,
    pub a_dir: Entry<T>,
    pub phi22: Entry<T>,
    pub theta: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundCertificate<T> {
    pub s: T,
    pub k: usize,
    pub r_omega: T,
    pub delta: usize,
    pub tiles: Vec<TileRecord<T>>,
    pub constants_used: ConstantsUsed<T>,
    /// Smallest tile estimate, scaled back by `r_Ω^{-2s}`.
    pub bound_pipeline: T,
    /// `ϑ_s k^{-s} r_Ω^{-2s}`.
    pub bound_closed_form: T,
    /// True when any global constant is corpus-estimated.
    pub heuristic: bool,
    pub path: CapacityPath,
    pub chord: ChordBound,
    pub radius_ratio: f64,
    pub notes: Vec<String>,
}

/// Indices of the tiles `Q_{5δ}(10δ i, 10δ j)` meeting the inside nodes
/// (nodes on a shared edge are attributed to both neighbours).
fn tiles_meeting<T: Real>(dom: &RasterDomain<T>, side: f64) -> BTreeSet<(i64, i64)> {
    let mut out = BTreeSet::new();
    let candidates = |v: f64| -> Vec<i64> {
        let t = v / side;
        let f = t.round();
        if ((t - f).abs() - 0.5).abs() < 1e-9 {
            vec![t.floor() as i64, t.ceil() as i64]
        } else {
            vec![f as i64]
        }
    };
    for j in 0..dom.ny {
        for i in 0..dom.nx {
            if dom.inside(i, j) {
                let p = dom.node_point(i, j);
                for a in candidates(p.x.to_f64_()) {
                    for b in candidates(p.y.to_f64_()) {
                        out.insert((a, b));
                    }
                }
            }
        }
    }
    out
}

/// Direct capacity of `Σ` in `B_R(c)` on the lattice of `dom`.
fn qp_capacity<T: Real>(
    dom: &RasterDomain<T>,
    cert: &FatnessCertificate<T>,
    c: Point<T>,
    big_r: T,
    s: FractionalOrder<T>,
    opts: &CertificateOptions,
) -> Result<Option<T>> {
    let h = dom.h;
    let reach = big_r + h + h;
    let lo_i = ((c.x - reach - dom.origin.x) / h).floor().to_f64_() as i64;
    let hi_i = ((c.x + reach - dom.origin.x) / h).ceil().to_f64_() as i64;
    let lo_j = ((c.y - reach - dom.origin.y) / h).floor().to_f64_() as i64;
    let hi_j = ((c.y + reach - dom.origin.y) / h).ceil().to_f64_() as i64;
    let (nx, ny) = ((hi_i - lo_i + 1) as usize, (hi_j - lo_j + 1) as usize);
    let point = |i: i64, j: i64| {
        Point::new(dom.origin.x + h * T::from_i64(i).unwrap(), dom.origin.y + h * T::from_i64(j).unwrap())
    };
    let mut disk = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            disk[j * nx + i] = point(lo_i + i as i64, lo_j + j as i64).dist(c) < big_r;
        }
    }
    if disk.iter().filter(|&&b| b).count() > opts.qp_max_unknowns {
        return Ok(None);
    }
    let mut sigma = vec![false; nx * ny];
    for &(i, j) in &cert.sigma {
        let (a, b) = (i - lo_i, j - lo_j);
        if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny || !disk[b as usize * nx + a as usize] {
            return Err(Error::Precondition("Σ must lie inside B_R".into()));
        }
        sigma[b as usize * nx + a as usize] = true;
    }
    let op = GridOperator::new(s, h, nx, ny);
    Ok(Some(capacity(op, &sigma, &disk, &opts.capacity)?.value))
}

/// Assembles the lower-bound certificate for `λ₁ˢ(Ω)`.
pub fn lower_bound_certificate<T: Real>(
    dom: &RasterDomain<T>,
    s: T,
    constants: &ConstantsTable<T>,
    opts: &CertificateOptions,
) -> Result<LowerBoundCertificate<T>> {
    let order = FractionalOrder::above_half(s)?;
    if !(opts.radius_ratio > std::f64::consts::SQRT_2) {
        return Err(Error::Precondition("R/r must exceed √2 so that the disk contains the tile".into()));
    }
    let k = topology_order(dom).k;
    let r = inradius(dom)?;
    let theta = constants.theta(s)?;
    let m_s = constants.morrey(s)?;
    let a_dir = constants.a_dir.ok_or(Error::MissingConstant("A_dir"))?;
    let phi22 = constants.phi22.ok_or(Error::MissingConstant("phi22"))?;

    // r_Ω = 1 by exact rescaling of the grid
    let unit = dom.scaled(r.recip());
    let d = delta(k);
    let side = 10.0 * d as f64;
    let half_side: T = lit(5.0 * d as f64);
    let big_r = half_side * lit(opts.radius_ratio);
    let kf = lit::<T>(k as f64);
    let guaranteed = kf.sqrt() / lit(4.0);
    let dist = big_r - half_side * lit(std::f64::consts::SQRT_2);
    let analytic_cap = projection_rhs(m_s, a_dir.value, s, big_r, dist, guaranteed, opts.chord);
    let poincare = s / (half_side * half_side) * phi22.value;

    let indices: Vec<(i64, i64)> = tiles_meeting(&unit, side).into_iter().collect();
    let tiles = indices
        .par_iter()
        .map(|&(i, j)| -> Result<(TileRecord<T>, Option<String>)> {
            let c = Point::new(lit(side * i as f64), lit(side * j as f64));
            let cert = fatness_certificate_with(&unit, c, k, T::one())?;
            let (cap, used, note) = match opts.path {
                CapacityPath::Analytic => (analytic_cap, CapacityPath::Analytic, None),
                CapacityPath::Qp => match qp_capacity(&unit, &cert, c, big_r, order, opts)? {
                    Some(v) => (v, CapacityPath::Qp, None),
                    None => (
                        analytic_cap,
                        CapacityPath::Analytic,
                        Some(format!("tile ({i}, {j}): QP too large, analytic capacity used")),
                    ),
                },
            };
            let rec = TileRecord {
                index: (i, j),
                center: c,
                sigma_nodes: cert.sigma.len(),
                reliable_cells: cert.reliable().len(),
                proj_e1: cert.proj_e1.length,
                proj_e2: cert.proj_e2.length,
                fatness_holds: cert.holds(),
                capacity_lower: cap,
                path_used: used,
                tile_bound: poincare * cap,
                fatness: Some(cert),
            };
            Ok((rec, note))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes: Vec<String> = Vec::new();
    let mut records = Vec::with_capacity(tiles.len());
    for (rec, note) in tiles {
        notes.extend(note);
        records.push(rec);
    }
    if records.iter().any(|t| !t.fatness_holds) {
        notes.push("a fatness set misses the projection bound on this raster".into());
    }
    let min_tile = records
        .iter()
        .map(|t| t.tile_bound)
        .reduce(T::min)
        .ok_or(Error::EmptyDomain)?;
    let scale = r.powf(-(s + s));
    Ok(LowerBoundCertificate {
        s,
        k,
        r_omega: r,
        delta: d,
        tiles: records,
        constants_used: ConstantsUsed { morrey_m: m_s, a_dir, phi22, theta },
        bound_pipeline: min_tile * scale,
        bound_closed_form: theta * kf.powf(-s) * scale,
        heuristic: constants.heuristic(),
        path: opts.path,
        chord: opts.chord,
        radius_ratio: opts.radius_ratio,
        notes,
    })
}

impl<T: Real> LowerBoundCertificate<T> {
    /// Drops the per-tile fatness data (kept only for rendering).
    pub fn without_fatness(mut self) -> Self {
        for t in &mut self.tiles {
            t.fatness = None;
        }
        self
    }

    /// Closed-form check `√k δ^{-1-2s} ≥ 2^{-1-2s} k^{-s}`.
    pub fn delta_inequality(&self) -> bool {
        let kf = lit::<T>(self.k as f64);
        let two: T = lit(2.0);
        let e = T::one() + self.s + self.s;
        kf.sqrt() * lit::<T>(self.delta as f64).powf(-e) >= two.powf(-e) * kf.powf(-self.s)
    }
}
