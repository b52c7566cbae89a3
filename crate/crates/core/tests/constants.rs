use std::collections::BTreeMap;
use std::f64::consts::PI;

use frcot::constants::{
    alpha, alpha_closed, fourier_a, fourier_a_closed, morrey_m, theta_from, zeta_seminorm, ConstantsTable, Provenance,
};
use frcot::gagliardo::{seminorm_1d, Profile};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

#[test]
fn alpha_at_landmarks() {
    // ∫(1+t²)^{-1} = π, ∫(1+t²)^{-3/2} = 2, ∫(1+t²)^{-2} = π/2
    for (s, want) in [(0.0, PI), (0.5, 2.0), (1.0, PI / 2.0)] {
        let a: f64 = alpha(s).unwrap();
        assert!((a - want).abs() <= 1e-12 * want, "s={s}: {a}");
    }
    assert!(alpha(1.5f64).is_err() && alpha(-0.1f64).is_err());
}

#[test]
fn fourier_a_at_one_half() {
    // ∫ 4 sin²(t/2) t^{-2} dt = 2π
    let a: f64 = fourier_a(0.5).unwrap();
    assert!((a - 1.0 / (2.0 * PI)).abs() <= 1e-12 / (2.0 * PI));
    assert!(fourier_a(1.0f64).is_err());
}

#[test]
fn morrey_vanishes_at_one_half() {
    let near: f64 = morrey_m(0.5 + 1e-6).unwrap();
    let mid: f64 = morrey_m(0.75).unwrap();
    assert!(near > 0.0 && near < 1e-4 * mid);
    assert!(morrey_m(0.5f64).is_err());
}

#[test]
fn zeta_pieces_are_consistent() {
    for s in [0.6f64, 0.8] {
        let z = zeta_seminorm(s, 1e-9).unwrap();
        assert_eq!(z.i2, z.i3);
        assert!((z.total - z.i1 - z.i2 - z.i3).abs() <= 1e-14 * z.total);
        let oracle = seminorm_1d(&Profile::zeta(s), s, 1e-7).unwrap();
        assert!((z.total - oracle).abs() <= 1e-6 * oracle, "s={s}: {} vs {oracle}", z.total);
    }
}

#[test]
fn theta_is_multiplicative() {
    let base = theta_from(0.7f64, 1.0, 1.0, 1.0);
    assert!((theta_from(0.7f64, 2.0, 3.0, 5.0) - base * 6.0 / 5.0).abs() <= 1e-15 * base);
}

#[test]
fn configured_entries_win() {
    let mut cfg = BTreeMap::new();
    cfg.insert("A_dir".to_string(), "0.5".to_string());
    cfg.insert("M_pw".to_string(), "0.1".to_string());
    cfg.insert("phi22".to_string(), "3".to_string());
    let t = ConstantsTable::<f64>::standard(&[0.75], 1e-10, &cfg).unwrap();
    let a = t.a_dir.unwrap();
    assert_eq!((a.value, a.provenance), (0.5, Provenance::Configured));
    assert!(!t.heuristic());
    let want = theta_from(0.75, morrey_m(0.75).unwrap(), 3.0, 0.5);
    assert!((t.theta(0.75).unwrap() - want).abs() <= 1e-14 * want);

    let rec = t.record(0.75).unwrap();
    assert_eq!(rec.alpha.provenance, Provenance::Quadrature);
    assert!(t.to_csv().lines().count() >= 2);

    cfg.insert("phi22".to_string(), "-1".to_string());
    assert!(ConstantsTable::<f64>::standard(&[0.75], 1e-10, &cfg).is_err());
    cfg.insert("phi22".to_string(), "abc".to_string());
    assert!(ConstantsTable::<f64>::standard(&[0.75], 1e-10, &cfg).is_err());
}

#[test]
fn explicit_table_lacks_globals() {
    let t = ConstantsTable::<f64>::explicit(&[0.6, 0.3], 1e-10).unwrap();
    assert!(t.theta(0.6).is_err());
    assert!(t.record(0.3).unwrap().morrey_m.is_none());
    assert!(t.record(0.6).unwrap().morrey_m.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alpha_matches_gamma_ratio(s in 0.0f64..=1.0) {
        let (a, c) = (alpha(s).unwrap(), alpha_closed(s));
        prop_assert!((a - c).abs() <= 1e-10 * c);
    }

    #[test]
    fn fourier_a_matches_closed_form(s in 0.05f64..0.99) {
        let (a, c) = (fourier_a(s).unwrap(), fourier_a_closed(s).unwrap());
        prop_assert!((a - c).abs() <= 1e-10 * c);
    }

    #[test]
    fn closed_forms_match_gamma_functions(s in 0.01f64..0.99) {
        let a = PI.sqrt() * gamma(s + 0.5) / gamma(s + 1.0);
        prop_assert!((alpha_closed(s) - a).abs() <= 1e-12 * a);
        let f = gamma(1.0 + 2.0 * s) * (PI * s).sin() / (2.0 * PI);
        prop_assert!((fourier_a_closed(s).unwrap() - f).abs() <= 1e-12 * f);
    }

    #[test]
    fn alpha_decreases(s in 0.0f64..0.99) {
        prop_assert!(alpha_closed(s + 0.01) < alpha_closed(s));
    }
}
