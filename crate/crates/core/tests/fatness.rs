use frcot::fatness::{centers_for_delta, delta, fatness_certificate, fatness_certificate_with, lambda_k, tile_centers};
use frcot::geometry::{inradius, topology_order, Point};
use frcot::pipeline::{build_family, FamilyKind, FamilySpec};
use proptest::prelude::*;

#[test]
fn delta_and_lambda_examples() {
    let d: Vec<usize> = [1, 3, 4, 8, 9, 15, 16].iter().map(|&k| delta(k)).collect();
    assert_eq!(d, [2, 2, 3, 3, 4, 4, 5]);
    let l: Vec<usize> = [1, 3, 4, 9, 16, 25, 36].iter().map(|&k| lambda_k(k)).collect();
    assert_eq!(l, [1, 1, 1, 1, 2, 2, 3]);
}

#[test]
fn centres_form_a_centred_lattice() {
    let c = Point::new(1.0, -2.0);
    let cells = tile_centers(5, 0.5, c).unwrap();
    let d = delta(5);
    assert_eq!(cells.len(), 4 * d * d);
    let (sx, sy) = cells.iter().fold((0.0, 0.0), |(a, b), (_, p)| (a + p.x, b + p.y));
    let n = cells.len() as f64;
    assert!((sx / n - c.x).abs() < 1e-12 && (sy / n - c.y).abs() < 1e-12);
    // neighbours are 5r apart; the first cell is top-left
    assert!((cells[1].1.x - cells[0].1.x - 2.5).abs() < 1e-12);
    assert!(cells[0].1.y > c.y && cells[0].1.x < c.x);
    assert!(tile_centers(0, 1.0, c).is_err() && centers_for_delta(2, 0.0, c).is_err());
}

#[test]
fn square_certificate_has_witnesses() {
    let h = 1.0 / 32.0;
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::Square { side: 1.0 }, h)).unwrap();
    let r = inradius(&dom).unwrap();
    let cert = fatness_certificate(&dom, Point::new(0.5, 0.5)).unwrap();
    assert_eq!(cert.k, 1);
    assert!(cert.holds(), "{} < {}", cert.max_projection(), cert.bound);
    let reliable = cert.reliable();
    assert!(reliable.len() >= 3 * cert.delta * cert.delta, "{} reliable", reliable.len());
    for cell in cert.cells.iter().filter(|c| c.reliable) {
        // the witness lies in its cell Q_{5r/2}
        let d = (cell.witness.x - cell.center.x).abs().max((cell.witness.y - cell.center.y).abs());
        assert!(d <= 2.5 * r + h, "{d}");
    }
}

#[test]
fn sigma_rows_encode_sigma() {
    let h = 1.0 / 16.0;
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::ShellSlug { k: 4 }, h)).unwrap();
    let k = topology_order(&dom).k;
    let cert = fatness_certificate_with(&dom, Point::new(0.0, 0.0), k, inradius(&dom).unwrap()).unwrap();
    let rows = cert.sigma_rows();
    let total: usize = rows.iter().flat_map(|(_, r)| r.iter().map(|&(_, l)| l)).sum();
    assert_eq!(total, cert.sigma.len());
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    for (j, runs) in &rows {
        for &(i0, len) in runs {
            for i in i0..i0 + len as i64 {
                assert!(cert.sigma.contains(&(i, *j)));
            }
        }
        assert!(runs.windows(2).all(|w| w[0].0 + (w[0].1 as i64) < w[1].0));
    }
    assert_eq!(cert.sigma_points().len(), cert.sigma.len());
    let json: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
    assert!(json.is_object());
    assert!(cert.to_svg(&dom).starts_with("<svg"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_bounds_root_k(k in 1usize..1_000_000) {
        let d = delta(k);
        prop_assert!(d * d > k && (d - 1) * (d - 1) <= k);
        prop_assert!(4.0 * lambda_k(k) as f64 >= (k as f64).sqrt());
        prop_assert!(lambda_k(k) >= 1);
    }
}
