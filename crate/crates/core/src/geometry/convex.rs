use serde::Serialize;

use super::Point;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Convex polygon with a distinguished interior base point `x0`.
///
/// Stored as half-planes `n_e · y ≤ c_e`, which makes the gauge a max of
/// linear functionals.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexBody<T> {
    pub vertices: Vec<Point<T>>,
    pub x0: Point<T>,
    /// `d_K(x₀)`: distance from `x0` to `∂K`.
    pub d_k: T,
    /// `D_K(x₀)`: largest distance from `x0` to `∂K`.
    pub big_d_k: T,
    normals: Vec<Point<T>>,
    /// `c_e - n_e·x0 > 0`, the support distance of each edge.
    heights: Vec<T>,
}

impl<T: Real> ConvexBody<T> {
    pub fn new(vertices: Vec<Point<T>>, x0: Point<T>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Precondition("polygon needs at least 3 vertices".into()));
        }
        let mut normals = Vec::with_capacity(n);
        let mut heights = Vec::with_capacity(n);
        for e in 0..n {
            let a = vertices[e];
            let b = vertices[(e + 1) % n];
            let c = vertices[(e + 2) % n];
            let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
            if !(cross > T::zero()) {
                return Err(Error::Precondition("vertices must be strictly convex and counter-clockwise".into()));
            }
            let edge = b - a;
            let len = edge.norm();
            let nrm = Point::new(edge.y / len, -edge.x / len);
            let hgt = nrm.dot(a - x0);
            if !(hgt > T::zero()) {
                return Err(Error::Precondition("base point must be strictly interior".into()));
            }
            normals.push(nrm);
            heights.push(hgt);
        }
        let d_k = heights.iter().copied().fold(T::infinity(), T::min);
        let big_d_k = vertices.iter().map(|v| v.dist(x0)).fold(T::zero(), T::max);
        Ok(Self { vertices, x0, d_k, big_d_k, normals, heights })
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about `c`.
    pub fn regular(n: usize, r: T, c: Point<T>) -> Result<Self> {
        let tau = T::PI() + T::PI();
        let verts = (0..n)
            .map(|k| {
                let t = tau * T::from_usize_(k) / T::from_usize_(n);
                Point::new(c.x + r * t.cos(), c.y + r * t.sin())
            })
            .collect();
        Self::new(verts, c)
    }

    /// Axis-aligned rectangle with half-sides `a`, `b` centred at `c`.
    pub fn rectangle(a: T, b: T, c: Point<T>) -> Result<Self> {
        let v = vec![
            Point::new(c.x - a, c.y - b),
            Point::new(c.x + a, c.y - b),
            Point::new(c.x + a, c.y + b),
            Point::new(c.x - a, c.y + b),
        ];
        Self::new(v, c)
    }

    /// The body `t(K - x0) + x0`.
    pub fn dilated(&self, t: T) -> Result<Self> {
        let v = self.vertices.iter().map(|&p| (p - self.x0).scale(t) + self.x0).collect();
        Self::new(v, self.x0)
    }

    pub fn centroid_of_vertices(vertices: &[Point<T>]) -> Point<T> {
        let n = T::from_usize_(vertices.len());
        let sx: T = vertices.iter().map(|p| p.x).sum();
        let sy: T = vertices.iter().map(|p| p.y).sum();
        Point::new(sx / n, sy / n)
    }
}

/// Minkowski gauge `j_K(x) = inf{λ > 0 : x ∈ λ(K - x0) + x0}`.
pub fn minkowski_gauge<T: Real>(k: &ConvexBody<T>, x: Point<T>) -> T {
    let v = x - k.x0;
    k.normals
        .iter()
        .zip(&k.heights)
        .map(|(n, &h)| n.dot(v) / h)
        .fold(T::zero(), T::max)
}

/// Radial map sending `r(K - x0) + x0` onto `B_r(x0)`.
pub fn phi_map<T: Real>(k: &ConvexBody<T>, x: Point<T>) -> Point<T> {
    let v = x - k.x0;
    let n = v.norm();
    if n == T::zero() {
        return k.x0;
    }
    v.scale(minkowski_gauge(k, x) / n) + k.x0
}

pub fn phi_inverse<T: Real>(k: &ConvexBody<T>, y: Point<T>) -> Point<T> {
    let v = y - k.x0;
    let n = v.norm();
    if n == T::zero() {
        return k.x0;
    }
    v.scale(n / minkowski_gauge(k, y)) + k.x0
}

/// `(L_K, M_K) = (2/d_K, D_K (2 + D_K/d_K))`.
pub fn lipschitz_constants<T: Real>(k: &ConvexBody<T>) -> (T, T) {
    let two: T = lit(2.0);
    (two / k.d_k, k.big_d_k * (two + k.big_d_k / k.d_k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_constants() {
        let sq = ConvexBody::<f64>::rectangle(1.0, 1.0, Point::origin()).unwrap();
        let (l, m) = lipschitz_constants(&sq);
        assert!((l - 2.0).abs() < 1e-14);
        assert!((m - 2f64.sqrt() * (2.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((minkowski_gauge(&sq, Point::new(1.0, 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_clockwise_and_exterior_base() {
        let v = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(ConvexBody::new(v, Point::new(0.2, 0.2)).is_err());
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(ConvexBody::new(v, Point::new(2.0, 2.0)).is_err());
    }
}
