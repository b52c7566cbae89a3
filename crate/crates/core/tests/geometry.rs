use frcot::geometry::{
    inradius, lipschitz_constants, minkowski_gauge, phi_inverse, phi_map, project, topology_order, ConvexBody, Direction,
    Point, RasterDomain,
};
use frcot::pipeline::{build_family, FamilyKind, FamilySpec};
use proptest::prelude::*;

fn square(half: f64, h: f64) -> RasterDomain<f64> {
    let n = (2.0 * half / h).round() as usize + 3;
    let o = -h * (n as f64 - 1.0) / 2.0;
    RasterDomain::from_fn(Point::new(o, o), h, n, n, |x, y| x.abs() < half && y.abs() < half).unwrap()
}

#[test]
fn inradius_of_square_and_disk() {
    let h = 1.0 / 64.0;
    let r = inradius(&square(1.0, h)).unwrap();
    assert!((r - 1.0).abs() <= 2.0 * h, "{r}");

    // disk of radius 3 in an 8 × 8 box
    let h: f64 = 0.05;
    let n = (8.0 / h) as usize + 1;
    let disk = RasterDomain::from_fn(Point::new(0.0, 0.0), h, n, n, |x, y| (x - 4.0).hypot(y - 4.0) < 3.0).unwrap();
    let r = inradius(&disk).unwrap();
    assert!((r - 3.0).abs() <= 2.0 * h, "{r}");
}

#[test]
fn empty_domain_has_no_inradius() {
    let dom = RasterDomain::from_fn(Point::new(0.0, 0.0), 0.1, 10, 10, |_, _| false).unwrap();
    assert!(inradius(&dom).is_err());
}

#[test]
fn shell_slug_inradius_stays_below_half_diagonal() {
    let h = 1.0 / 16.0;
    let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::ShellSlug { k: 25 }, h)).unwrap();
    assert_eq!(topology_order(&dom).k, 25);
    assert!(inradius(&dom).unwrap() <= 0.5f64.sqrt() + 2.0 * h);
}

#[test]
fn orders_of_disk_and_annulus() {
    let h = 2.0 / 63.0;
    let disk = build_family::<f64>(&FamilySpec::new(FamilyKind::Disk { radius: 1.0 }, h)).unwrap();
    let ring = build_family::<f64>(&FamilySpec::new(FamilyKind::Annulus { inner: 0.4, outer: 1.0 }, h)).unwrap();
    let t = topology_order(&disk);
    assert_eq!((t.k, t.bounded_components.len()), (1, 0));
    let t = topology_order(&ring);
    assert_eq!((t.k, t.bounded_components.len()), (2, 1));
    assert!(t.has_unbounded);
}

#[test]
fn punctures_count_towards_the_order() {
    let mut dom = square(1.0, 0.125);
    dom.add_puncture(Point::new(0.0, 0.0)).unwrap();
    dom.add_puncture(Point::new(0.5, 0.5)).unwrap();
    assert_eq!(topology_order(&dom).k, 3);
}

#[test]
fn projection_examples() {
    let h: f64 = 0.1;
    let dom = RasterDomain::from_fn(Point::new(0.0, 0.0), h, 20, 5, |_, _| true).unwrap();
    let one = [dom.index(3, 2)];
    assert!((project(&dom, &one, Direction::e1()).length - h).abs() < 1e-12);

    // ten nodes on a horizontal line
    let row: Vec<usize> = (3..13).map(|i| dom.index(i, 2)).collect();
    let across = project(&dom, &row, Direction::e2());
    let along = project(&dom, &row, Direction::e1());
    // project() reports the e₁ projection as the extent transverse to e₁
    let (long, short) = if across.length > along.length { (across, along) } else { (along, across) };
    assert!((long.length - 10.0 * h).abs() < 1e-12);
    assert!((short.length - h).abs() < 1e-12);
    assert!(project(&dom, &[], Direction::e1()).intervals.is_empty());
}

#[test]
fn gauge_examples() {
    let o = Point::new(0.0f64, 0.0);
    let disk = ConvexBody::regular(256, 1.0, o).unwrap();
    assert_eq!(minkowski_gauge(&disk, o), 0.0);
    assert!((minkowski_gauge(&disk, Point::new(0.5, 0.0)) - 0.5).abs() < 1e-3);
    for v in &disk.vertices {
        assert!((minkowski_gauge(&disk, *v) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lipschitz_constants_of_a_rectangle() {
    let k = ConvexBody::rectangle(1.5f64, 0.5, Point::new(0.0, 0.0)).unwrap();
    let (l, m) = lipschitz_constants(&k);
    let d = 1.5f64.hypot(0.5);
    assert!((l - 4.0).abs() < 1e-12);
    assert!((m - d * (2.0 + d / 0.5)).abs() < 1e-12);
}

#[test]
fn text_format_rejects_garbage() {
    assert!(RasterDomain::<f64>::from_text("").is_err());
    assert!(RasterDomain::<f64>::from_text("frgeo v2 3 3 1 0 0\n000\n000\n000\n").is_err());
    assert!(RasterDomain::<f64>::from_text("frgeo v1 3 3 1 0 0\n000\n000\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn text_round_trip(bits in proptest::collection::vec(any::<bool>(), 8 * 8), h in 0.01f64..2.0) {
        let dom = RasterDomain::from_fn(Point::new(-1.0, 0.5), h, 10, 10, |x, y| {
            let (i, j) = (((x + 1.0) / h).round() as usize, ((y - 0.5) / h).round() as usize);
            bits[(j - 1) * 8 + (i - 1)]
        })
        .unwrap();
        let back = RasterDomain::<f64>::from_text(&dom.to_text()).unwrap();
        prop_assert_eq!(back.mask, dom.mask);
        prop_assert_eq!((back.nx, back.ny), (dom.nx, dom.ny));
        prop_assert!((back.h - dom.h).abs() <= 1e-15 * dom.h);
    }

    #[test]
    fn inradius_scales_exactly(t in 0.1f64..10.0) {
        let dom = build_family::<f64>(&FamilySpec::new(FamilyKind::Annulus { inner: 0.3, outer: 1.0 }, 0.1)).unwrap();
        let r = inradius(&dom).unwrap();
        let rs = inradius(&dom.scaled(t)).unwrap();
        prop_assert!((rs - t * r).abs() <= 1e-12 * t * r);
        prop_assert_eq!(topology_order(&dom.scaled(t)).k, 2);
    }

    #[test]
    fn gauge_is_homogeneous(x in -3.0f64..3.0, y in -3.0f64..3.0, t in 0.0f64..5.0, n in 3usize..12) {
        let c = Point::new(0.2, -0.1);
        let k = ConvexBody::regular(n, 1.3, c).unwrap();
        let p = Point::new(x, y);
        let q = Point::new(c.x + t * (x - c.x), c.y + t * (y - c.y));
        let (g, gq) = (minkowski_gauge(&k, p), minkowski_gauge(&k, q));
        prop_assert!((gq - t * g).abs() <= 1e-12 * (1.0 + t * g));
        prop_assert!(phi_inverse(&k, phi_map(&k, p)).dist(p) <= 1e-12 * (1.0 + p.norm()));
    }
}
