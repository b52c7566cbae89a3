use rayon::prelude::*;

use super::RasterDomain;
use crate::error::{Error, Result};
use crate::scalar::Real;

const INF: i64 = i64::MAX / 4;

/// Lower envelope of parabolas (Felzenszwalb–Huttenlocher), in place.
fn edt_1d(f: &mut [i64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let src: Vec<i64> = f.to_vec();
    let mut k = 0usize;
    // skip leading infinite sites
    let first = match src.iter().position(|&x| x < INF) {
        Some(p) => p,
        None => return,
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if src[q] >= INF {
            continue;
        }
        loop {
            let p = v[k];
            let sq = ((src[q] + (q * q) as i64) - (src[p] + (p * p) as i64)) as f64 / (2.0 * (q as f64 - p as f64));
            if sq <= z[k] && k > 0 {
                k -= 1;
            } else if sq <= z[k] {
                // k == 0 and z[0] = -inf never triggers; kept for clarity
                break;
            } else {
                k += 1;
                v[k] = q;
                z[k] = sq;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, out) in f.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as i64 - p as i64;
        *out = d * d + src[p];
    }
}

/// Exact squared Euclidean distance (in node units) from every node to the
/// nearest obstacle node. Obstacles are outside nodes and punctures.
pub fn squared_edt<T: Real>(dom: &RasterDomain<T>) -> Vec<i64> {
    let (nx, ny) = (dom.nx, dom.ny);
    let mut g = vec![INF; nx * ny];
    for (k, &inside) in dom.mask.iter().enumerate() {
        if !inside {
            g[k] = 0;
        }
    }
    for p in &dom.punctures {
        g[dom.index(p.node.0, p.node.1)] = 0;
    }
    // columns
    let mut cols: Vec<Vec<i64>> = (0..nx).map(|i| (0..ny).map(|j| g[j * nx + i]).collect()).collect();
    cols.par_iter_mut().for_each(|c| {
        let mut v = vec![0usize; ny];
        let mut z = vec![0f64; ny + 1];
        edt_1d(c, &mut v, &mut z);
    });
    for (i, c) in cols.iter().enumerate() {
        for (j, &val) in c.iter().enumerate() {
            g[j * nx + i] = val;
        }
    }
    g.par_chunks_mut(nx).for_each(|row| {
        let mut v = vec![0usize; nx];
        let mut z = vec![0f64; nx + 1];
        edt_1d(row, &mut v, &mut z);
    });
    g
}

/// Euclidean distance (length units) to the nearest obstacle node.
pub fn distance_field<T: Real>(dom: &RasterDomain<T>) -> Vec<T> {
    squared_edt(dom)
        .into_iter()
        .map(|d2| T::from_i64(d2).unwrap().sqrt() * dom.h)
        .collect()
}

/// Largest distance from an inside node to the nearest outside node or puncture.
pub fn inradius<T: Real>(dom: &RasterDomain<T>) -> Result<T> {
    if dom.count_inside() == 0 {
        return Err(Error::EmptyDomain);
    }
    let d2 = squared_edt(dom);
    let best = dom
        .mask
        .iter()
        .zip(&d2)
        .filter(|(&m, _)| m)
        .map(|(_, &d)| d)
        .max()
        .unwrap_or(0);
    Ok(T::from_i64(best).unwrap().sqrt() * dom.h)
}
