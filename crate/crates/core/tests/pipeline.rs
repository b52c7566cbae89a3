use std::collections::BTreeMap;

use frcot::constants::ConstantsTable;
use frcot::geometry::{inradius, topology_order};
use frcot::pipeline::{
    build_family, inscribed_rectangle, lower_bound_certificate, s_half_sweep, shell_slug_sizes, verify_main_theorem,
    CapacityPath, CertificateOptions, FamilyKind, FamilySpec, SHalfOptions, Verdict, VerifyOptions,
};
use proptest::prelude::*;

fn table(s: &[f64]) -> ConstantsTable<f64> {
    let cfg: BTreeMap<String, String> =
        [("A_dir", "0.6727"), ("M_pw", "0.0712"), ("phi22", "3.0138")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ConstantsTable::standard(s, 1e-10, &cfg).unwrap()
}

#[test]
fn shell_slug_size_examples() {
    let got: Vec<_> = [2, 3, 5, 7, 10, 17].iter().map(|&k| shell_slug_sizes(k)).collect();
    assert_eq!(got, [(1, 0), (1, 1), (2, 0), (2, 2), (3, 0), (4, 0)]);
}

#[test]
fn families_have_their_orders() {
    let h = 1.0 / 8.0;
    let mut specs: Vec<FamilySpec> = (2..=12).map(|k| FamilySpec::new(FamilyKind::ShellSlug { k }, h)).collect();
    specs.extend((1..=4).map(|k| FamilySpec::new(FamilyKind::CombWindow { k, half_width: 3.0, half_height: None }, 0.5)));
    specs.push(FamilySpec::new(FamilyKind::Disk { radius: 1.0 }, h));
    specs.push(FamilySpec::new(FamilyKind::Square { side: 2.0 }, h));
    specs.push(FamilySpec::new(FamilyKind::Annulus { inner: 0.5, outer: 1.5 }, h));
    specs.push(FamilySpec::new(FamilyKind::RandomPerforated { seed: 11, count: 3, side: 4.0 }, h));
    for spec in &specs {
        let dom = build_family::<f64>(spec).unwrap();
        assert_eq!(Some(topology_order(&dom).k), spec.expected_order(), "{:?}", spec.kind);
    }
}

#[test]
fn family_preconditions() {
    let bad = [
        FamilySpec::new(FamilyKind::ShellSlug { k: 1 }, 0.125),
        FamilySpec::new(FamilyKind::ShellSlug { k: 3 }, 0.2),
        FamilySpec::new(FamilyKind::CombWindow { k: 9, half_width: 3.0, half_height: Some(4.0) }, 0.5),
        FamilySpec::new(FamilyKind::Annulus { inner: 2.0, outer: 1.0 }, 0.1),
        FamilySpec::new(FamilyKind::Disk { radius: 1.0 }, 0.0),
    ];
    for spec in &bad {
        assert!(build_family::<f64>(spec).is_err(), "{:?}", spec.kind);
    }
}

#[test]
fn family_spec_json_round_trip() {
    let spec = FamilySpec::new(FamilyKind::CombWindow { k: 3, half_width: 4.0, half_height: Some(5.0) }, 0.5);
    let back: FamilySpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn inscribed_rectangle_of_a_square() {
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::Square { side: 1.0 }, 0.125)).unwrap();
    let r = inscribed_rectangle(&dom, false).unwrap();
    for (got, want) in [(r.x0, 0.0), (r.x1, 1.0), (r.y0, 0.0), (r.y1, 1.0)] {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn certificate_closed_form_and_delta_inequality() {
    let s = 0.75;
    let t = table(&[s]);
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::ShellSlug { k: 5 }, 0.125)).unwrap();
    let cert = lower_bound_certificate(&dom, s, &t, &CertificateOptions::default()).unwrap();
    let r = inradius(&dom).unwrap();
    let want = t.theta(s).unwrap() * 5f64.powf(-s) * r.powf(-2.0 * s);
    assert!((cert.bound_closed_form - want).abs() <= 1e-12 * want);
    assert!(cert.delta_inequality());
    assert_eq!((cert.k, cert.delta), (5, 3));
    assert!(!cert.heuristic);
    assert!(cert.tiles.iter().all(|t| t.path_used == CapacityPath::Analytic));
    assert!(lower_bound_certificate(&dom, 0.5, &t, &CertificateOptions::default()).is_err());
    let bad = CertificateOptions { radius_ratio: 1.2, ..Default::default() };
    assert!(lower_bound_certificate(&dom, s, &t, &bad).is_err());
}

#[test]
fn verify_passes_on_an_annulus() {
    let s = 0.8;
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::Annulus { inner: 0.4, outer: 1.0 }, 1.0 / 16.0)).unwrap();
    let rep = verify_main_theorem(&dom, s, &table(&[s]), &VerifyOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.lower_pipeline <= rep.eig && rep.lower_closed_form <= rep.eig);
    assert!(rep.upper.is_some());
}

#[test]
fn s_half_sweep_without_discrete_solves() {
    let opts = SHalfOptions { discrete: false, ..Default::default() };
    let sw = s_half_sweep(2, &[0.6f64, 0.7], &opts).unwrap();
    assert_eq!(sw.rows.len(), 2);
    assert!(sw.rows.iter().all(|r| r.upper > 0.0 && r.eig.is_none()));
    assert!(sw.spread >= 1.0);
    assert!(s_half_sweep(2, &[0.8f64], &opts).is_err());
    assert!(s_half_sweep(0, &[0.6f64], &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn certificate_is_scale_covariant(t in 0.2f64..5.0, k in 2usize..7) {
        let s = 0.7;
        let tab = table(&[s]);
        let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::ShellSlug { k }, 0.125)).unwrap();
        let opts = CertificateOptions::default();
        let a = lower_bound_certificate(&dom, s, &tab, &opts).unwrap();
        let b = lower_bound_certificate(&dom.scaled(t), s, &tab, &opts).unwrap();
        let f = t.powf(-2.0 * s);
        prop_assert!((b.bound_pipeline - f * a.bound_pipeline).abs() <= 1e-6 * b.bound_pipeline);
        prop_assert!((b.bound_closed_form - f * a.bound_closed_form).abs() <= 1e-6 * b.bound_closed_form);
        prop_assert_eq!(a.tiles.len(), b.tiles.len());
    }
}
