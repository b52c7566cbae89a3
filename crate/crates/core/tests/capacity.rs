use frcot::capacity::{capacity, point_capacity_1d, projection_rhs, CapacityOptions, ChordBound};
use frcot::gagliardo::{FractionalOrder, GridOperator, NonlocalForm};
use proptest::prelude::*;

const N: usize = 24;

fn mask(f: impl Fn(f64, f64) -> bool) -> Vec<bool> {
    // nodes of a unit-spaced N × N grid, centred
    let c = (N as f64 - 1.0) / 2.0;
    (0..N * N).map(|k| f((k % N) as f64 - c, (k / N) as f64 - c)).collect()
}

fn disk(r: f64) -> Vec<bool> {
    mask(|x, y| x.hypot(y) < r)
}

fn op(s: f64, h: f64) -> std::sync::Arc<GridOperator<f64>> {
    GridOperator::new(FractionalOrder::new(s).unwrap(), h, N, N)
}

#[test]
fn minimiser_is_a_capacitary_potential() {
    let sigma = mask(|x, y| x.abs() < 2.0 && y.abs() < 1.0);
    let omega = disk(10.0);
    let res = capacity(op(0.7, 1.0), &sigma, &omega, &CapacityOptions::default()).unwrap();
    assert!(res.kkt_residual < 1e-9);
    for (k, &u) in res.minimizer.values.iter().enumerate() {
        assert!((-1e-12..=1.0 + 1e-9).contains(&u), "u = {u}");
        if sigma[k] {
            assert!(u >= 1.0 - 1e-12);
        }
        if !omega[k] {
            assert_eq!(u, 0.0);
        }
    }
    // the indicator of Σ is admissible
    let form = NonlocalForm::full(op(0.7, 1.0), &omega).unwrap();
    let ind: Vec<f64> = form.active.iter().map(|&k| if sigma[k] { 1.0 } else { 0.0 }).collect();
    assert!(res.value <= form.evaluate_vec(&ind));
    assert!(!res.active_set.is_empty() && res.active_set.iter().all(|&k| sigma[k]));
}

#[test]
fn dense_and_iterative_solves_agree() {
    let sigma = mask(|x, y| (x - 1.0).hypot(y) < 2.5);
    let omega = disk(11.0);
    let dense = CapacityOptions { dense_limit: 100_000, ..Default::default() };
    let cg = CapacityOptions { dense_limit: 0, ..Default::default() };
    let a = capacity(op(0.6, 1.0), &sigma, &omega, &dense).unwrap().value;
    let b = capacity(op(0.6, 1.0), &sigma, &omega, &cg).unwrap().value;
    assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
}

#[test]
fn rejects_sigma_outside_omega() {
    let sigma = disk(6.0);
    assert!(capacity(op(0.7, 1.0), &sigma, &disk(4.0), &CapacityOptions::default()).is_err());
    assert!(capacity(op(0.7, 1.0), &sigma[1..], &disk(8.0), &CapacityOptions::default()).is_err());
    let none = vec![false; N * N];
    assert_eq!(capacity(op(0.7, 1.0), &none, &disk(8.0), &CapacityOptions::default()).unwrap().value, 0.0);
}

#[test]
fn point_capacity_shrinks_with_the_container() {
    let o = CapacityOptions::default();
    let near = point_capacity_1d(0.0, -1.0, 1.0, 0.75, 255, &o).unwrap();
    let far = point_capacity_1d(0.0, -4.0, 4.0, 0.75, 1023, &o).unwrap();
    assert!(far < near && far > 0.0);
    assert!(point_capacity_1d(2.0, -1.0, 1.0, 0.75, 63, &o).is_err());
    assert!(point_capacity_1d(0.0, -1.0, 1.0, 0.4, 63, &o).is_err());
}

#[test]
fn chord_variants_order() {
    let (m, a, s, r, d, p): (f64, f64, f64, f64, f64, f64) = (0.3, 0.67, 0.75, 20.0, 5.0, 1.0);
    let stated = projection_rhs(m, a, s, r, d, p, ChordBound::Stated);
    let diam = projection_rhs(m, a, s, r, d, p, ChordBound::Diameter);
    assert!(stated > 0.0 && diam > 0.0);
    // every chord of B_r is at most 2r, so the stated factor is the larger one
    assert!(stated >= diam);
    let equal = projection_rhs(m, a, s, r, 4.0 * r, p, ChordBound::Stated);
    assert!((equal - diam).abs() <= 1e-14 * diam);
    // doubling the projection length helps in both variants
    assert!(projection_rhs(m, a, s, r, d, 2.0 * p, ChordBound::Stated) > stated);
    assert!(projection_rhs(m, a, s, r, d, 2.0 * p, ChordBound::Diameter) > diam);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn capacity_is_monotone_in_sigma(a in 0.5f64..3.0, b in 0.5f64..3.0, s in 0.55f64..0.95) {
        let (r1, r2) = (a.min(b), a.max(b) + 0.5);
        let omega = disk(10.0);
        let o = CapacityOptions::default();
        let c1 = capacity(op(s, 1.0), &disk(r1), &omega, &o).unwrap().value;
        let c2 = capacity(op(s, 1.0), &disk(r2), &omega, &o).unwrap().value;
        prop_assert!(c1 <= c2 * (1.0 + 1e-10));
    }

    #[test]
    fn capacity_decreases_in_omega(r in 5.0f64..8.0, s in 0.55f64..0.95) {
        let o = CapacityOptions::default();
        let small = capacity(op(s, 1.0), &disk(2.0), &disk(r), &o).unwrap().value;
        let large = capacity(op(s, 1.0), &disk(2.0), &disk(r + 3.0), &o).unwrap().value;
        prop_assert!(large <= small * (1.0 + 1e-10));
    }

    #[test]
    fn capacity_scales_with_spacing(h in 0.1f64..5.0, s in 0.55f64..0.95) {
        let o = CapacityOptions::default();
        let (sigma, omega) = (disk(2.0), disk(9.0));
        let one = capacity(op(s, 1.0), &sigma, &omega, &o).unwrap().value;
        let got = capacity(op(s, h), &sigma, &omega, &o).unwrap().value;
        prop_assert!((got - h.powf(2.0 - 2.0 * s) * one).abs() <= 1e-8 * got);
    }
}
