use frcot::gagliardo::{FractionalOrder, GridFunction, GridOperator, NonlocalForm, Profile};
use frcot::geometry::{Point, RasterDomain};
use frcot::spectral::{
    domain_eigenvalue, funnel_cutoff, funnel_parameters, rayleigh_quotient, rayleigh_upper_bound, smallest_eigenvalue,
    spread, EigOptions, TrialDescriptor,
};
use proptest::prelude::*;

fn lshape(h: f64) -> RasterDomain<f64> {
    let n = (2.0 / h).round() as usize + 1;
    RasterDomain::from_fn(Point::new(-1.0, -1.0), h, n, n, |x, y| {
        x.abs() < 1.0 && y.abs() < 1.0 && !(x > 0.0 && y > 0.0)
    })
    .unwrap()
}

fn order(s: f64) -> FractionalOrder<f64> {
    FractionalOrder::new(s).unwrap()
}

#[test]
fn eigenvalue_is_bit_reproducible() {
    let dom = lshape(1.0 / 16.0);
    let a = domain_eigenvalue(&dom, order(0.7), false, &EigOptions::default()).unwrap();
    let b = domain_eigenvalue(&dom, order(0.7), false, &EigOptions::default()).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.vector, b.vector);
}

#[test]
fn iterative_and_dense_paths_agree() {
    let dom = lshape(1.0 / 16.0);
    let dense = EigOptions { dense_limit: 100_000, ..Default::default() };
    let cg = EigOptions { dense_limit: 0, ..Default::default() };
    let a = domain_eigenvalue(&dom, order(0.6), false, &dense).unwrap();
    let b = domain_eigenvalue(&dom, order(0.6), false, &cg).unwrap();
    assert!((a.lambda - b.lambda).abs() <= 1e-7 * a.lambda, "{} vs {}", a.lambda, b.lambda);
    assert!(a.residual <= 1e-8 && b.residual <= 1e-8);
}

#[test]
fn dense_matrix_oracle() {
    // smallest eigenvalue of A / h² by an independent symmetric solver
    let dom = lshape(0.25);
    let op = GridOperator::for_domain(&dom, order(0.8));
    let form = NonlocalForm::full(op, &dom.mask).unwrap();
    let n = form.len();
    let h2 = dom.h * dom.h;
    let a = nalgebra::DMatrix::from_row_slice(n, n, &form.dense()) / h2;
    let want = a.symmetric_eigen().eigenvalues.min();
    let got = smallest_eigenvalue(&form, &EigOptions::default()).unwrap().lambda;
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
}

#[test]
fn eigenvalue_scales_with_the_domain() {
    let dom = lshape(1.0 / 8.0);
    let s = 0.65;
    let a = domain_eigenvalue(&dom, order(s), false, &EigOptions::default()).unwrap().lambda;
    let b = domain_eigenvalue(&dom.scaled(3.0), order(s), false, &EigOptions::default()).unwrap().lambda;
    assert!((b - 3f64.powf(-2.0 * s) * a).abs() <= 1e-7 * b);
}

#[test]
fn removing_punctures_raises_the_eigenvalue() {
    let mut dom = lshape(1.0 / 8.0);
    dom.add_puncture(Point::new(-0.5, -0.5)).unwrap();
    let opts = EigOptions::default();
    let kept = domain_eigenvalue(&dom, order(0.75), false, &opts).unwrap();
    let removed = domain_eigenvalue(&dom, order(0.75), true, &opts).unwrap();
    assert_eq!(removed.unknowns + 1, kept.unknowns);
    assert!(removed.lambda > kept.lambda);
}

#[test]
fn funnel_cutoff_vanishes_at_integers() {
    let s = 0.7;
    let (eps, n) = funnel_parameters(s).unwrap();
    assert!((eps - 0.1f64.powf(1.0 / 0.4)).abs() < 1e-15);
    assert_eq!(n, 9);
    for j in -(n as i32)..=(n as i32) {
        assert_eq!(funnel_cutoff(s, eps, n, j as f64), 0.0);
        assert_eq!(funnel_cutoff(s, eps, n, j as f64 + 0.5), 1.0);
    }
    assert_eq!(funnel_cutoff(s, eps, n, n as f64 + 1.0), 1.0);
    let x = 3.0 + 0.5 * eps;
    assert!((funnel_cutoff(s, eps, n, x) - 0.5f64.powf(0.4)).abs() < 1e-14);
}

#[test]
fn trial_validation() {
    assert!(funnel_parameters(0.5f64).is_err());
    let t = TrialDescriptor::funnel_for(0.7f64, 2).unwrap();
    assert!(rayleigh_upper_bound(&t, 0.8, 1e-8).is_err());
    assert!(rayleigh_upper_bound(&TrialDescriptor::ScaledBump { n: 0.0f64, p: 2 }, 0.7, 1e-8).is_err());
}

#[test]
fn tensor_trial_bounds_continuum_square() {
    // the square (-1,1)² contains the support of the product bump
    let s = 0.75;
    let b = Profile::poly(0.0f64, 1.0, 2);
    let up = rayleigh_upper_bound(&TrialDescriptor::Tensor { g: b.clone(), q: b }, s, 1e-8).unwrap().value;
    let dom = RasterDomain::from_fn(Point::new(-1.0, -1.0), 1.0 / 16.0, 33, 33, |x: f64, y: f64| x.abs() < 1.0 && y.abs() < 1.0)
        .unwrap();
    let lam = domain_eigenvalue(&dom, order(s), false, &EigOptions::default()).unwrap().lambda;
    assert!(lam < up, "{lam} vs {up}");
}

#[test]
fn spread_examples() {
    assert_eq!(spread([2.0, 4.0, 3.0].into_iter()), 2.0);
    assert_eq!(spread(std::iter::empty::<f64>()), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rayleigh_quotients_dominate_the_ground_state(seed in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let dom = lshape(0.125);
        let op = GridOperator::for_domain(&dom, order(0.6));
        let form = NonlocalForm::full(op, &dom.mask).unwrap();
        let lam = smallest_eigenvalue(&form, &EigOptions::default()).unwrap().lambda;
        let u = GridFunction::from_fn(&dom, &dom.mask, |x, y| {
            let k = ((x + 1.0) * 8.0 + (y + 1.0) * 56.0).round() as usize;
            1.0 + seed[k % 16] * (3.0 * x + y).sin()
        });
        prop_assert!(rayleigh_quotient(&form, &u).unwrap() >= lam * (1.0 - 1e-10));
    }

    #[test]
    fn scaled_bump_bound_scales(n in 0.5f64..4.0, s in 0.2f64..0.9) {
        let one = rayleigh_upper_bound(&TrialDescriptor::ScaledBump { n: 1.0, p: 2 }, s, 1e-9).unwrap().value;
        let got = rayleigh_upper_bound(&TrialDescriptor::ScaledBump { n, p: 2 }, s, 1e-9).unwrap().value;
        prop_assert!((got - n.powf(-2.0 * s) * one).abs() <= 1e-6 * got);
    }
}
