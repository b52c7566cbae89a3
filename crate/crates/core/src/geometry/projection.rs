use serde::Serialize;

use super::{Direction, Point, RasterDomain};
use crate::scalar::{lit, Real};

/// `Π_ω(E)` as a sorted list of disjoint intervals on the line `ω^⊥`,
/// parametrised by the coordinate `x·ω^⊥` with `ω^⊥ = (-ω_y, ω_x)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionResult<T> {
    pub direction: Direction<T>,
    pub intervals: Vec<(T, T)>,
    pub length: T,
    /// True when the direction is not a coordinate axis (node dots of radius `h/2`).
    pub approximate: bool,
}

fn merge<T: Real>(mut iv: Vec<(T, T)>) -> Vec<(T, T)> {
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(T, T)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => {
                if b > last.1 {
                    last.1 = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// Projection of a set of grid nodes; each node contributes its footprint of width `h`.
pub fn project<T: Real>(dom: &RasterDomain<T>, nodes: &[usize], dir: Direction<T>) -> ProjectionResult<T> {
    let perp = Point::new(-dir.omega().y, dir.omega().x);
    match dir.axis() {
        Some(axis) => {
            // exact integer merge along the surviving coordinate
            let mut coords: Vec<i64> = nodes
                .iter()
                .map(|&k| {
                    let (i, j) = dom.coords(k);
                    if axis == 0 {
                        j as i64
                    } else {
                        i as i64
                    }
                })
                .collect();
            coords.sort_unstable();
            coords.dedup();
            let sign = if axis == 0 { perp.y.signum() } else { perp.x.signum() };
            let base = if axis == 0 { dom.origin.y } else { dom.origin.x };
            let half: T = lit(0.5);
            let mut iv = Vec::new();
            let mut run: Option<(i64, i64)> = None;
            for c in coords {
                run = match run {
                    Some((a, b)) if c == b + 1 => Some((a, c)),
                    Some((a, b)) => {
                        iv.push((a, b));
                        Some((c, c))
                    }
                    None => Some((c, c)),
                };
            }
            if let Some(r) = run {
                iv.push(r);
            }
            let intervals: Vec<(T, T)> = iv
                .into_iter()
                .map(|(a, b)| {
                    let lo = (base + dom.h * (T::from_i64(a).unwrap() - half)) * sign;
                    let hi = (base + dom.h * (T::from_i64(b).unwrap() + half)) * sign;
                    if lo <= hi {
                        (lo, hi)
                    } else {
                        (hi, lo)
                    }
                })
                .collect();
            let intervals = merge(intervals);
            let length = intervals.iter().map(|(a, b)| *b - *a).sum();
            ProjectionResult { direction: dir, intervals, length, approximate: false }
        }
        None => {
            let pts: Vec<Point<T>> = nodes.iter().map(|&k| {
                let (i, j) = dom.coords(k);
                dom.node_point(i, j)
            }).collect();
            project_points(&pts, dom.h, dir)
        }
    }
}

/// Projection of node dots of diameter `h` centred at `points`.
pub fn project_points<T: Real>(points: &[Point<T>], h: T, dir: Direction<T>) -> ProjectionResult<T> {
    let perp = Point::new(-dir.omega().y, dir.omega().x);
    let half = h * lit(0.5);
    let iv = points.iter().map(|p| {
        let c = p.dot(perp);
        (c - half, c + half)
    }).collect();
    let intervals = merge(iv);
    let length = intervals.iter().map(|(a, b)| *b - *a).sum();
    ProjectionResult {
        direction: dir,
        intervals,
        length,
        approximate: dir.axis().is_none(),
    }
}
