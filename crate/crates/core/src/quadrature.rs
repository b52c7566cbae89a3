//! Quadrature primitives: Gauss–Legendre and Gauss–Jacobi rules, and an
//! adaptive Gauss–Kronrod integrator with user-supplied breakpoints.
//!
//! Fixed rules are generated in `f64` (Newton iteration for Legendre,
//! Golub–Welsch for Jacobi) and cast to the working scalar on use.

use std::collections::BinaryHeap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// A quadrature rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrates `f` over `[a, b]` with the rule mapped affinely.
    pub fn integrate<T: Real, F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * lit(0.5);
        let mid = (a + b) * lit(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + lit::<T>(w) * f(mid + half * lit(x));
        }
        acc * half
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|t| mid + half * t).collect();
        let w = self.weights.iter().map(|w| w * half).collect();
        (x, w)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Gauss–Jacobi rule for the weight `(x - a)^left (b - x)^right` on `[a, b]`.
///
/// Returns mapped nodes and weights, so that
/// `∫_a^b (x-a)^left (b-x)^right f(x) dx ≈ Σ w_i f(x_i)`.
/// Both exponents must exceed `-1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64, left: f64, right: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && left > -1.0 && right > -1.0);
    // Reference weight (1 - t)^alpha (1 + t)^beta on [-1, 1]; t = -1 maps to a.
    let alpha = right;
    let beta = left;
    let ab = alpha + beta;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let b2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + alpha) * (m + beta) * (m + ab)
                    / ((2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0))
            };
            jm[(k, k + 1)] = b2.sqrt();
            jm[(k + 1, k)] = b2.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = jm.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let half = 0.5 * (b - a);
    let scale = half.powf(1.0 + left + right);
    let x = pairs.iter().map(|p| a + half * (1.0 + p.0)).collect();
    let w = pairs.iter().map(|p| p.1 * scale).collect();
    (x, w)
}

const K15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Tolerances and budget for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid);
    let mut k = fc * lit(K15_WEIGHTS[7]);
    let mut g = fc * lit(G7_WEIGHTS[3]);
    for i in 0..7 {
        let dx = half * lit(K15_NODES[i]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * lit(K15_WEIGHTS[i]);
        if i % 2 == 1 {
            g = g + s * lit(G7_WEIGHTS[i / 2]);
        }
    }
    (k * half, ((k - g) * half).abs())
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`.
///
/// `breaks` are interior points where `f` is known to be non-smooth; the
/// initial partition is split there. Endpoint singularities are fine as long
/// as they are integrable (the rule never evaluates the endpoints).
pub fn adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    breaks: &[T],
    opts: AdaptiveOptions,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let mut cuts: Vec<T> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut points = vec![lo];
    points.extend(cuts);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = T::zero();
    let mut evals = 0;
    for w in points.windows(2) {
        let (v, e) = kronrod(&mut f, w[0], w[1]);
        evals += 15;
        total = total + v;
        err = err + e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let abs_tol: T = lit(opts.abs_tol);
    let rel_tol: T = lit(opts.rel_tol);
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
                residual: err.to_f64_(),
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = (worst.a + worst.b) * lit(0.5);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted floating point resolution
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.b);
        evals += 30;
        total = total - worst.value + v1 + v2;
        err = err - worst.error + e1 + e2;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated drift from incremental updates.
    let value: T = heap.iter().map(|p| p.value).sum();
    let error: T = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value: value * sign,
        error,
        evaluations: evals,
    })
}

/// Integrates `f` over `[a, b]` where `f` behaves like a power of `(x - a)`
/// near `a`, using the substitution `x = a + (b - a) u^p` on `[0, 1]`.
pub fn adaptive_power_left<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    p: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate<T>> {
    let len = b - a;
    let pp: T = lit(p);
    adaptive(
        |u: T| {
            if u <= T::zero() {
                return T::zero();
            }
            let x = a + len * u.powf(pp);
            f(x) * len * pp * u.powf(pp - T::one())
        },
        T::zero(),
        T::one(),
        &[],
        opts,
    )
}

/// Integrates `f` over `[a, b]` with power-law endpoint behaviour at both
/// ends: each half is flattened by [`adaptive_power_left`] with exponents
/// `p_left` and `p_right` respectively.
pub fn adaptive_power_both<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    p_left: f64,
    p_right: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate<T>> {
    let m = (a + b) * lit(0.5);
    let l = adaptive_power_left(&f, a, m, p_left, opts)?;
    // x = b - (b - m) u^p, measured from b so that points near b keep
    // their full relative resolution
    let (len, pp): (T, T) = (b - m, lit(p_right));
    let r = adaptive(
        |u: T| {
            if u <= T::zero() {
                return T::zero();
            }
            f(b - len * u.powf(pp)) * len * pp * u.powf(pp - T::one())
        },
        T::zero(),
        T::one(),
        &[],
        opts,
    )?;
    Ok(Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
        evaluations: l.evaluations + r.evaluations,
    })
}

/// Kahan–Babuška compensated sum in a fixed (slice) order.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c = c + ((sum - t) + v);
        } else {
            c = c + ((v - t) + sum);
        }
        sum = t;
    }
    sum + c
}
