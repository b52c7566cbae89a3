use frcot::gagliardo::stencil::{read_stencil, write_stencil, Stencil2};
use frcot::gagliardo::{
    seminorm_1d, seminorm_tensor_2d, FractionalOrder, GridFunction, GridOperator, NonlocalForm, Profile,
};
use frcot::geometry::{Point, RasterDomain};
use proptest::prelude::*;

fn blob(h: f64) -> RasterDomain<f64> {
    RasterDomain::from_fn(Point::new(-1.0, -1.0), h, 17, 17, |x, y| x * x + 0.5 * y * y < 0.6).unwrap()
}

fn form(dom: &RasterDomain<f64>, s: f64) -> NonlocalForm<f64> {
    let op = GridOperator::for_domain(dom, FractionalOrder::new(s).unwrap());
    NonlocalForm::full(op, &dom.mask).unwrap()
}

#[test]
fn dense_matrix_is_symmetric_and_matches_matvec() {
    let f = form(&blob(0.125), 0.7);
    let n = f.len();
    let a = f.dense();
    for i in 0..n {
        for j in 0..i {
            assert!((a[i * n + j] - a[j * n + i]).abs() <= 1e-14 * a[i * n + i]);
        }
    }
    let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
    let mut y = vec![0.0; n];
    f.matvec(&x, &mut y);
    for i in 0..n {
        let d: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
        assert!((d - y[i]).abs() <= 1e-10 * (1.0 + d.abs()));
    }
}

#[test]
fn regional_form_kills_constants() {
    let dom = blob(0.125);
    let op = GridOperator::for_domain(&dom, FractionalOrder::new(0.6).unwrap());
    let reg = NonlocalForm::regional(op.clone(), &dom.mask).unwrap();
    let full = NonlocalForm::full(op, &dom.mask).unwrap();
    let one = vec![1.0; reg.len()];
    assert!(reg.evaluate_vec(&one).abs() < 1e-10);
    assert!(full.evaluate_vec(&one) > 0.0);
}

#[test]
fn stencil_is_symmetric_and_scales() {
    let (s, n) = (0.65, 12);
    let a = Stencil2::new(s, 1.0, n, n);
    let b = Stencil2::new(s, 0.25, n, n);
    for d1 in -5i64..=5 {
        for d2 in -5i64..=5 {
            let w = a.get(d1, d2);
            assert_eq!(w, a.get(d2, d1));
            assert_eq!(w, a.get(-d1, d2));
            assert!((b.get(d1, d2) - w * 0.25f64.powf(2.0 - 2.0 * s)).abs() <= 1e-14 * w.abs());
        }
    }
    // off-diagonal couplings are negative, the diagonal positive
    assert!(a.diagonal() > 0.0 && a.get(1, 0) < 0.0 && a.get(3, 2) < 0.0);
}

#[test]
fn stencil_text_round_trip() {
    let st = Stencil2::new(0.8, 0.5, 6, 4);
    let mut buf = Vec::new();
    write_stencil(&st, &mut buf).unwrap();
    let back = read_stencil(buf.as_slice()).unwrap();
    assert_eq!((back.nx, back.ny), (6, 4));
    for (u, v) in st.w.iter().zip(&back.w) {
        assert!((u - v).abs() <= 1e-15 * u.abs());
    }
}

#[test]
fn single_precision_agrees() {
    let dom = blob(0.125);
    let f64_form = form(&dom, 0.75);
    let dom32 = RasterDomain::<f32>::new(Point::new(-1.0, -1.0), 0.125, dom.nx, dom.ny, dom.mask.clone()).unwrap();
    let op = GridOperator::for_domain(&dom32, FractionalOrder::new(0.75f32).unwrap());
    let f32_form = NonlocalForm::full(op, &dom32.mask).unwrap();
    let x: Vec<f64> = (0..f64_form.len()).map(|i| (i as f64 * 0.37).sin()).collect();
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let (a, b) = (f64_form.evaluate_vec(&x), f32_form.evaluate_vec(&x32) as f64);
    assert!((a - b).abs() <= 1e-4 * a, "{a} vs {b}");
}

#[test]
fn hat_seminorm_is_positive_and_orders_rejected() {
    let hat = Profile::poly(0.0f64, 1.0, 1);
    let v = seminorm_1d(&hat, 0.4, 1e-8).unwrap();
    assert!(v > 0.0 && v.is_finite());
    assert!(seminorm_1d(&hat, 1.0, 1e-8).is_err());
    assert!(seminorm_tensor_2d(&hat, &hat, 0.0, 1e-8).is_err());
    assert!(FractionalOrder::above_half(0.5).is_err());
}

#[test]
fn grid_function_sampling_respects_mask() {
    let dom = blob(0.25);
    let u = GridFunction::from_fn(&dom, &dom.mask, |_, _| 2.0);
    for (v, &m) in u.values.iter().zip(&dom.mask) {
        assert_eq!(*v, if m { 2.0 } else { 0.0 });
    }
    let f = form(&dom, 0.6);
    let x = f.gather(&u).unwrap();
    assert!((f.evaluate(&u).unwrap() - f.evaluate_vec(&x)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn form_is_nonnegative_and_homogeneous(
        seed in proptest::collection::vec(-1.0f64..1.0, 64),
        c in -4.0f64..4.0,
        s in 0.05f64..0.95,
    ) {
        let dom = blob(0.125);
        let f = form(&dom, s);
        let x: Vec<f64> = (0..f.len()).map(|i| seed[i % 64] * (1.0 + (i / 64) as f64)).collect();
        let q = f.evaluate_vec(&x);
        prop_assert!(q >= 0.0);
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!((f.evaluate_vec(&cx) - c * c * q).abs() <= 1e-10 * (1.0 + c * c * q));
    }

    #[test]
    fn form_is_sign_symmetric(seed in proptest::collection::vec(-1.0f64..1.0, 64)) {
        let f = form(&blob(0.125), 0.55);
        let x: Vec<f64> = (0..f.len()).map(|i| seed[i % 64]).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(f.evaluate_vec(&x), f.evaluate_vec(&y));
    }

    #[test]
    fn tensor_seminorm_scales(t in 0.3f64..3.0, s in 0.55f64..0.9) {
        let (g, q) = (Profile::poly(0.0, 1.0, 2), Profile::poly(0.0, 0.5, 2));
        let (gt, qt) = (Profile::poly(0.0, t, 2), Profile::poly(0.0, 0.5 * t, 2));
        let a = seminorm_tensor_2d(&g, &q, s, 1e-7).unwrap();
        let b = seminorm_tensor_2d(&gt, &qt, s, 1e-7).unwrap();
        prop_assert!((b - t.powf(2.0 - 2.0 * s) * a).abs() <= 1e-5 * b);
    }

    #[test]
    fn one_dimensional_seminorm_scales_and_translates(t in 0.3f64..3.0, c in -5.0f64..5.0, s in 0.2f64..0.9) {
        let a = seminorm_1d(&Profile::poly(0.0, 1.0, 2), s, 1e-8).unwrap();
        let b = seminorm_1d(&Profile::poly(c, t, 2), s, 1e-8).unwrap();
        prop_assert!((b - t.powf(1.0 - 2.0 * s) * a).abs() <= 1e-6 * b);
    }
}
