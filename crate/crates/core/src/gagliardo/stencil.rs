//! Interaction weights of the Gagliardo form for continuous piecewise-linear
//! (1D) and bilinear (2D) nodal elements on uniform grids.
//!
//! For nodal basis functions `φ_i` the stiffness entry depends only on the
//! displacement `d = i - j` and equals
//!
//! ```text
//! W(d) = ∫ |z|^{-N-2s} [2R(d) - R(d+z) - R(d-z)] dz
//! ```
//!
//! where `R` is the autocorrelation of the reference hat, i.e. the cubic
//! B-spline (tensorised in 2D). `R` is piecewise polynomial on unit cells, so
//! the integral splits into cells: cells touching the kernel singularity are
//! integrated exactly through Duffy moments, the rest by tensor Gauss rules,
//! and the far tail in closed form. Lengths are in units of `h`; the physical
//! weight is `h^{N-2s} W(d)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::quadrature::{gauss_legendre, Rule};

/// Displacements with `|d|_∞` below this use the high-order rule on every cell.
pub const NEAR_FIELD_CUTOFF: i64 = 4;

const NEAR_POINTS: usize = 14;
const FAR_POINTS: usize = 8;

fn near_rule() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(NEAR_POINTS))
}

fn far_rule() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(FAR_POINTS))
}

fn smooth_rule() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(40))
}

/// Cubic B-spline, the autocorrelation of the hat `(1-|t|)_+`.
pub fn bspline3(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    }
}

/// Monomial coefficients of the B-spline piece on `[k, k+1]`.
fn piece(k: i64) -> [f64; 4] {
    match k {
        -2 => [4.0 / 3.0, 2.0, 1.0, 1.0 / 6.0],
        -1 => [2.0 / 3.0, 0.0, -1.0, -0.5],
        0 => [2.0 / 3.0, 0.0, -1.0, 0.5],
        1 => [4.0 / 3.0, -2.0, 1.0, -1.0 / 6.0],
        _ => [0.0; 4],
    }
}

/// Coefficients in `t ∈ [0,1]` of `t ↦ B(a + σ t)` for integer `a`, `σ = ±1`.
fn shifted(a: i64, sigma: i64) -> [f64; 4] {
    let k = if sigma > 0 { a } else { a - 1 };
    let p = piece(k);
    let c = a as f64;
    // Taylor shift p(c + u)
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let mut q = [0.0; 4];
    for (j, qj) in q.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate().skip(j) {
            acc += binom[i][j] * c.powi((i - j) as i32) * pi;
        }
        *qj = acc;
    }
    if sigma < 0 {
        q[1] = -q[1];
        q[3] = -q[3];
    }
    q
}

/// Moments `I_b = ∫_0^1 v^b (1+v²)^{-1-s} dv`, `b = 0..=3`.
fn duffy_moments(s: f64) -> [f64; 4] {
    let rule = smooth_rule();
    let mut out = [0.0; 4];
    for (b, o) in out.iter_mut().enumerate() {
        *o = rule.integrate(0.0, 1.0, |v: f64| v.powi(b as i32) * (1.0 + v * v).powf(-1.0 - s));
    }
    out
}

/// `∫_{[0,1]^2} Σ c_ab t1^a t2^b |t|^{-2-2s} dt` for coefficients vanishing to
/// second order at the corner.
fn corner_cell(c: &[[f64; 4]; 4], s: f64, moments: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for (a, row) in c.iter().enumerate() {
        for (b, &cab) in row.iter().enumerate() {
            if a + b < 2 || cab == 0.0 {
                continue;
            }
            acc += cab * (moments[a] + moments[b]) / ((a + b) as f64 - 2.0 * s);
        }
    }
    acc
}

fn cos_power_integral(s: f64) -> f64 {
    smooth_rule().integrate(0.0, std::f64::consts::FRAC_PI_4, |t: f64| t.cos().powf(2.0 * s))
}

/// `∫_{R² \ [-L,L]²} |z|^{-2-2s} dz`.
pub fn square_tail_2d(l: f64, s: f64) -> f64 {
    4.0 / s * l.powf(-2.0 * s) * cos_power_integral(s)
}

fn gauss_cell<F: Fn(f64, f64) -> f64>(rule: &Rule, x0: f64, y0: f64, f: F) -> f64 {
    let mut acc = 0.0;
    for (&xi, &wi) in rule.nodes.iter().zip(&rule.weights) {
        let x = x0 + 0.5 * (1.0 + xi);
        let mut inner = 0.0;
        for (&yj, &wj) in rule.nodes.iter().zip(&rule.weights) {
            let y = y0 + 0.5 * (1.0 + yj);
            inner += wj * f(x, y);
        }
        acc += wi * inner;
    }
    0.25 * acc
}

/// Unit-spacing 2D weight `W(d)` for `s ∈ (0,1)`.
pub fn weight_2d(d1: i64, d2: i64, s: f64) -> f64 {
    let (d1, d2) = (d1.abs(), d2.abs());
    let (d1, d2) = if d1 >= d2 { (d1, d2) } else { (d2, d1) };
    let moments = duffy_moments(s);
    let kernel = |x: f64, y: f64| (x * x + y * y).powf(-1.0 - s);
    let r = |x: f64, y: f64| bspline3(x) * bspline3(y);
    if d1 <= 1 {
        let rd = r(d1 as f64, d2 as f64);
        let l = d1 + 2;
        let mut acc = 2.0 * rd * square_tail_2d(l as f64, s);
        for m1 in -l..l {
            for m2 in -l..l {
                let touches = (m1 == 0 || m1 == -1) && (m2 == 0 || m2 == -1);
                if touches {
                    let s1 = if m1 == 0 { 1 } else { -1 };
                    let s2 = if m2 == 0 { 1 } else { -1 };
                    let p1 = shifted(d1, s1);
                    let p2 = shifted(d2, s2);
                    let q1 = shifted(d1, -s1);
                    let q2 = shifted(d2, -s2);
                    let mut c = [[0.0; 4]; 4];
                    for a in 0..4 {
                        for b in 0..4 {
                            c[a][b] = -p1[a] * p2[b] - q1[a] * q2[b];
                        }
                    }
                    c[0][0] += 2.0 * rd;
                    acc += corner_cell(&c, s, &moments);
                } else {
                    let (fd1, fd2) = (d1 as f64, d2 as f64);
                    acc += gauss_cell(near_rule(), m1 as f64, m2 as f64, |x, y| {
                        kernel(x, y) * (2.0 * rd - r(fd1 + x, fd2 + y) - r(fd1 - x, fd2 - y))
                    });
                }
            }
        }
        acc
    } else {
        // W(d) = -2 ∫_{[-2,2]²} K(w - d) R(w) dw
        let mut acc = 0.0;
        let (fd1, fd2) = (d1 as f64, d2 as f64);
        let rule = if d1 < NEAR_FIELD_CUTOFF { near_rule() } else { far_rule() };
        for m1 in -2..2i64 {
            for m2 in -2..2i64 {
                let corner1 = m1 == d1 || m1 + 1 == d1;
                let corner2 = m2 == d2 || m2 + 1 == d2;
                if corner1 && corner2 {
                    let s1 = if m1 == d1 { 1 } else { -1 };
                    let s2 = if m2 == d2 { 1 } else { -1 };
                    let p1 = shifted(d1, s1);
                    let p2 = shifted(d2, s2);
                    let mut c = [[0.0; 4]; 4];
                    for a in 0..4 {
                        for b in 0..4 {
                            c[a][b] = p1[a] * p2[b];
                        }
                    }
                    acc += corner_cell(&c, s, &moments);
                } else {
                    acc += gauss_cell(rule, m1 as f64, m2 as f64, |x, y| {
                        kernel(x - fd1, y - fd2) * r(x, y)
                    });
                }
            }
        }
        -2.0 * acc
    }
}

/// Unit-spacing 1D weight `W(d)` for `s ∈ (0,1)`.
pub fn weight_1d(d: i64, s: f64) -> f64 {
    let d = d.abs();
    let rule = near_rule();
    let moment = |a: usize| 1.0 / (a as f64 - 2.0 * s);
    if d <= 1 {
        let bd = bspline3(d as f64);
        let fd = d as f64;
        let l = d + 2;
        let mut acc = bd * (l as f64).powf(-2.0 * s) / s;
        // [0,1]: polynomial with vanishing constant and linear parts
        let p = shifted(d, 1);
        let q = shifted(d, -1);
        for a in 2..4 {
            acc += -(p[a] + q[a]) * moment(a);
        }
        for m in 1..l {
            acc += rule.integrate(m as f64, (m + 1) as f64, |t: f64| {
                t.powf(-1.0 - 2.0 * s) * (2.0 * bd - bspline3(fd + t) - bspline3(fd - t))
            });
        }
        2.0 * acc
    } else {
        let fd = d as f64;
        let mut acc = 0.0;
        for m in -2..2i64 {
            if m + 1 == d {
                // w = d - t, t ∈ [0,1]
                let p = shifted(d, -1);
                for (a, &pa) in p.iter().enumerate() {
                    if pa != 0.0 {
                        acc += pa * moment(a);
                    }
                }
            } else {
                let rule = if d < NEAR_FIELD_CUTOFF { near_rule() } else { far_rule() };
                acc += rule.integrate(m as f64, (m + 1) as f64, |w: f64| {
                    (fd - w).abs().powf(-1.0 - 2.0 * s) * bspline3(w)
                });
            }
        }
        -2.0 * acc
    }
}

/// Translation-invariant 2D stencil for displacements `0 ≤ d1 < nx`,
/// `0 ≤ d2 < ny` (other signs follow by symmetry), scaled to spacing `h`.
#[derive(Clone, Debug)]
pub struct Stencil2 {
    pub s: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major over `d2`, i.e. `w[d2 * nx + d1]`.
    pub w: Vec<f64>,
}

type UnitTable = Arc<(usize, Vec<f64>)>;

/// Unit-spacing weights for `0 ≤ d2 ≤ d1 < m`, memoised per `s`.
fn unit_table(s: f64, m: usize) -> UnitTable {
    static CACHE: OnceLock<Mutex<HashMap<u64, UnitTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&s.to_bits()) {
        if t.0 >= m {
            return t.clone();
        }
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..=a).map(move |b| (a, b))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| weight_2d(a as i64, b as i64, s))
        .collect();
    let mut sym = vec![0.0; m * m];
    for (&(a, b), v) in pairs.iter().zip(vals) {
        sym[a * m + b] = v;
        sym[b * m + a] = v;
    }
    let t = Arc::new((m, sym));
    cache.lock().unwrap().insert(s.to_bits(), t.clone());
    t
}

impl Stencil2 {
    pub fn new(s: f64, h: f64, nx: usize, ny: usize) -> Self {
        let table = unit_table(s, nx.max(ny));
        let m = table.0;
        let scale = h.powf(2.0 - 2.0 * s);
        let mut w = vec![0.0; nx * ny];
        for d2 in 0..ny {
            for d1 in 0..nx {
                w[d2 * nx + d1] = table.1[d1 * m + d2] * scale;
            }
        }
        Self { s, h, nx, ny, w }
    }

    /// Weight for a signed displacement; zero outside the table.
    #[inline]
    pub fn get(&self, d1: i64, d2: i64) -> f64 {
        let (a, b) = (d1.unsigned_abs() as usize, d2.unsigned_abs() as usize);
        if a >= self.nx || b >= self.ny {
            0.0
        } else {
            self.w[b * self.nx + a]
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.w[0]
    }
}

/// Translation-invariant 1D stencil for `0 ≤ d < n`, scaled to spacing `h`.
#[derive(Clone, Debug)]
pub struct Stencil1 {
    pub s: f64,
    pub h: f64,
    pub w: Vec<f64>,
}

impl Stencil1 {
    pub fn new(s: f64, h: f64, n: usize) -> Self {
        let scale = h.powf(1.0 - 2.0 * s);
        let w = (0..n)
            .into_par_iter()
            .map(|d| weight_1d(d as i64, s) * scale)
            .collect();
        Self { s, h, w }
    }

    #[inline]
    pub fn get(&self, d: i64) -> f64 {
        self.w.get(d.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }
}

/// Binary stencil dump: magic, `s`, `h`, entry count, then
/// `(dx: i32, dy: i32, w: f64)` little-endian records.
pub const STENCIL_MAGIC: &[u8; 8] = b"FRSTNCL1";

pub fn write_stencil<W: std::io::Write>(st: &Stencil2, mut out: W) -> std::io::Result<()> {
    out.write_all(STENCIL_MAGIC)?;
    out.write_all(&st.s.to_le_bytes())?;
    out.write_all(&st.h.to_le_bytes())?;
    out.write_all(&(st.w.len() as u64).to_le_bytes())?;
    for d2 in 0..st.ny {
        for d1 in 0..st.nx {
            out.write_all(&(d1 as i32).to_le_bytes())?;
            out.write_all(&(d2 as i32).to_le_bytes())?;
            out.write_all(&st.w[d2 * st.nx + d1].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_stencil<R: std::io::Read>(mut inp: R) -> crate::error::Result<Stencil2> {
    use crate::error::Error;
    let mut magic = [0u8; 8];
    inp.read_exact(&mut magic)?;
    if &magic != STENCIL_MAGIC {
        return Err(Error::Parse { line: 0, msg: "bad stencil magic".into() });
    }
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b8)?;
    let s = f64::from_le_bytes(b8);
    inp.read_exact(&mut b8)?;
    let h = f64::from_le_bytes(b8);
    inp.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut recs = Vec::with_capacity(count);
    let (mut nx, mut ny) = (0usize, 0usize);
    let mut b4 = [0u8; 4];
    for _ in 0..count {
        inp.read_exact(&mut b4)?;
        let dx = i32::from_le_bytes(b4);
        inp.read_exact(&mut b4)?;
        let dy = i32::from_le_bytes(b4);
        inp.read_exact(&mut b8)?;
        let w = f64::from_le_bytes(b8);
        if dx < 0 || dy < 0 {
            return Err(Error::Parse { line: 0, msg: "negative displacement in dump".into() });
        }
        nx = nx.max(dx as usize + 1);
        ny = ny.max(dy as usize + 1);
        recs.push((dx as usize, dy as usize, w));
    }
    let mut w = vec![0.0; nx * ny];
    for (dx, dy, v) in recs {
        w[dy * nx + dx] = v;
    }
    Ok(Stencil2 { s, h, nx, ny, w })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bspline_partition_of_unity() {
        for &t in &[0.0, 0.3, 0.77] {
            let sum: f64 = (-3..=3).map(|k| bspline3(k as f64 + t)).sum();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_pieces_match_pointwise() {
        for a in -2..=2 {
            for sigma in [-1, 1] {
                let c = shifted(a, sigma);
                for &t in &[0.1, 0.5, 0.9] {
                    let v = c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
                    let x = a as f64 + sigma as f64 * t;
                    assert!((v - bspline3(x)).abs() < 1e-14, "a={a} σ={sigma} t={t}");
                }
            }
        }
    }
}
