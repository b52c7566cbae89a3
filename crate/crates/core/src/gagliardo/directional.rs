//! Directional seminorms `∫∫ |u(x) - u(x+ρω)|² |ρ|^{-1-2s} dρ dx`.
//!
//! Along a grid line the bilinear interpolant is piecewise linear, so the
//! inner integral is exactly the 1D Toeplitz form of the line samples; the
//! outer integral over parallel lines is the trapezoidal sum with weight `h`.

use rayon::prelude::*;

use super::stencil::Stencil1;
use super::GridFunction;
use crate::geometry::{Direction, Point};
use crate::quadrature::compensated_sum;
use crate::scalar::Real;

/// Value of a directional seminorm and whether the lines were resampled.
#[derive(Clone, Copy, Debug)]
pub struct Directional<T> {
    pub value: T,
    pub approximate: bool,
}

fn line_form<T: Real>(st: &Stencil1, v: &[T]) -> T {
    let n = v.len();
    let rows: Vec<T> = (0..n)
        .map(|i| {
            if v[i] == T::zero() {
                return T::zero();
            }
            let mut acc = T::zero();
            for (j, &vj) in v.iter().enumerate() {
                if vj != T::zero() {
                    acc = acc + T::lit(st.get(i as i64 - j as i64)) * vj;
                }
            }
            acc * v[i]
        })
        .collect();
    compensated_sum(rows)
}

fn bilinear<T: Real>(u: &GridFunction<T>, x: T, y: T) -> T {
    let (nx, ny) = (u.nx as i64, u.ny as i64);
    let (fx, fy) = (x.floor(), y.floor());
    let (i, j) = (fx.to_f64_() as i64, fy.to_f64_() as i64);
    let (tx, ty) = (x - fx, y - fy);
    let at = |a: i64, b: i64| -> T {
        if a < 0 || b < 0 || a >= nx || b >= ny {
            T::zero()
        } else {
            u.values[(b * nx + a) as usize]
        }
    };
    let one = T::one();
    at(i, j) * (one - tx) * (one - ty) + at(i + 1, j) * tx * (one - ty) + at(i, j + 1) * (one - tx) * ty + at(i + 1, j + 1) * tx * ty
}

/// Directional seminorm squared of the bilinear interpolant of `u` (spacing `h`).
pub fn directional_seminorm<T: Real>(u: &GridFunction<T>, h: T, dir: Direction<T>, s: T) -> Directional<T> {
    let (nx, ny) = (u.nx, u.ny);
    match dir.axis() {
        Some(axis) => {
            let len = if axis == 0 { nx } else { ny };
            let lines = if axis == 0 { ny } else { nx };
            let st = Stencil1::new(s.to_f64_(), h.to_f64_(), len);
            let parts: Vec<T> = (0..lines)
                .into_par_iter()
                .map(|l| {
                    let v: Vec<T> = (0..len)
                        .map(|t| if axis == 0 { u.values[l * nx + t] } else { u.values[t * nx + l] })
                        .collect();
                    line_form(&st, &v)
                })
                .collect();
            Directional { value: compensated_sum(parts) * h, approximate: false }
        }
        None => {
            // sample along lines p(c) + t ω in grid units, spacing 1 both ways
            let w = dir.omega();
            let perp = Point::new(-w.y, w.x);
            let corners = [
                Point::new(T::zero(), T::zero()),
                Point::new(T::from_usize_(nx - 1), T::zero()),
                Point::new(T::zero(), T::from_usize_(ny - 1)),
                Point::new(T::from_usize_(nx - 1), T::from_usize_(ny - 1)),
            ];
            let proj = |v: Point<T>| corners.iter().map(|c| c.dot(v)).fold((T::infinity(), T::neg_infinity()), |(a, b), x| (a.min(x), b.max(x)));
            let (c0, c1) = proj(perp);
            let (t0, t1) = proj(w);
            let one = T::one();
            let nc = ((c1 - c0).ceil().to_f64_() as usize) + 3;
            let nt = ((t1 - t0).ceil().to_f64_() as usize) + 3;
            let st = Stencil1::new(s.to_f64_(), h.to_f64_(), nt);
            let parts: Vec<T> = (0..nc)
                .into_par_iter()
                .map(|k| {
                    let c = c0 - one + T::from_usize_(k);
                    let v: Vec<T> = (0..nt)
                        .map(|m| {
                            let t = t0 - one + T::from_usize_(m);
                            bilinear(u, perp.x * c + w.x * t, perp.y * c + w.y * t)
                        })
                        .collect();
                    line_form(&st, &v)
                })
                .collect();
            Directional { value: compensated_sum(parts) * h, approximate: true }
        }
    }
}

/// Shorthand for the two axis directions.
pub fn axis_seminorms<T: Real>(u: &GridFunction<T>, h: T, s: T) -> (T, T) {
    let a = directional_seminorm(u, h, Direction::e1(), s).value;
    let b = directional_seminorm(u, h, Direction::e2(), s).value;
    (a, b)
}
