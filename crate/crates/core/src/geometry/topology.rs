use serde::Serialize;

use super::RasterDomain;
use crate::scalar::Real;

/// Order of connectivity: bounded complement components + the unbounded one
/// + punctures.
#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    pub k: usize,
    pub bounded_components: Vec<Vec<usize>>,
    pub has_unbounded: bool,
}

const NEIGH8: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// 8-connected components of the outside nodes; components touching the
/// raster frame merge with the point at infinity.
pub fn topology_order<T: Real>(dom: &RasterDomain<T>) -> TopologyReport {
    let (nx, ny) = (dom.nx, dom.ny);
    let mut label = vec![usize::MAX; nx * ny];
    let mut bounded = Vec::new();
    let mut stack = Vec::new();
    let mut next = 0usize;
    for start in 0..nx * ny {
        if dom.mask[start] || label[start] != usize::MAX {
            continue;
        }
        let mut comp = Vec::new();
        let mut touches_frame = false;
        label[start] = next;
        stack.push(start);
        while let Some(k) = stack.pop() {
            comp.push(k);
            let (i, j) = dom.coords(k);
            if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                touches_frame = true;
            }
            for (di, dj) in NEIGH8 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                    continue;
                }
                let q = b as usize * nx + a as usize;
                if !dom.mask[q] && label[q] == usize::MAX {
                    label[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
        if !touches_frame {
            comp.sort_unstable();
            bounded.push(comp);
        }
    }
    TopologyReport {
        k: bounded.len() + 1 + dom.punctures.len(),
        bounded_components: bounded,
        has_unbounded: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn disk_and_annulus() {
        let disk = RasterDomain::<f64>::from_fn(Point::new(-2.0, -2.0), 0.1, 41, 41, |x, y| x * x + y * y < 1.5).unwrap();
        assert_eq!(topology_order(&disk).k, 1);
        let ann = RasterDomain::<f64>::from_fn(Point::new(-2.0, -2.0), 0.1, 41, 41, |x, y| {
            let r = (x * x + y * y).sqrt();
            r > 0.5 && r < 1.5
        })
        .unwrap();
        let t = topology_order(&ann);
        assert_eq!(t.k, 2);
        assert_eq!(t.bounded_components.len(), 1);
    }

    #[test]
    fn diagonal_gap_does_not_leak_under_eight_connectivity() {
        // a one-node-thick diagonal wall still encloses its hole
        let n = 9;
        let mut mask = vec![false; n * n];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                mask[j * n + i] = true;
            }
        }
        mask[4 * n + 4] = false;
        let d = RasterDomain::<f64>::new(Point::origin(), 1.0, n, n, mask).unwrap();
        assert_eq!(topology_order(&d).k, 2);
    }
}
