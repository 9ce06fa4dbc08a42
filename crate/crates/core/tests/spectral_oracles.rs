mod common;

use common::*;
use ionflow::spectral::norm::{l2_squared, l2_squared_values};
use ionflow::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn product_matches_triad_sum_on_random_8x8() {
    let g = SpectralGrid::new(8).unwrap();
    let mut r = rng(11);
    for _ in 0..10 {
        let f = SpectralField::from_physical(&g, &random_values(8, &mut r)).unwrap();
        let h = SpectralField::from_physical(&g, &random_values(8, &mut r)).unwrap();
        let p = multiply_dealiased(&f, &h).unwrap();
        for (l, expect) in triad(8, |k| f.coeff(k.0, k.1), |k| h.coeff(k.0, k.1)) {
            assert!((p.coeff(l.0, l.1) - expect).norm() < 1e-12, "mode {l:?}");
        }
        for i in 0..g.len() {
            if !g.dealias_mask()[i] {
                assert_eq!(p.coeffs()[i], Complex64::default());
            }
        }
    }
}

#[test]
fn product_is_commutative_and_bilinear() {
    let g = SpectralGrid::new(16).unwrap();
    let mut r = rng(5);
    let a = SpectralField::from_physical(&g, &random_values(16, &mut r)).unwrap();
    let b = SpectralField::from_physical(&g, &random_values(16, &mut r)).unwrap();
    let c = SpectralField::from_physical(&g, &random_values(16, &mut r)).unwrap();
    let ab = multiply_dealiased(&a, &b).unwrap();
    assert!(max_diff(&ab, &multiply_dealiased(&b, &a).unwrap()) < 1e-15);
    let lhs = multiply_dealiased(&a.scaled(2.0).add(&c), &b).unwrap();
    let rhs = ab.scaled(2.0).add(&multiply_dealiased(&c, &b).unwrap());
    assert!(max_diff(&lhs, &rhs) < 1e-14);
}

#[test]
fn plancherel_on_band_limited_fields() {
    let g = SpectralGrid::new(32).unwrap();
    let mut r = rng(3);
    let f = random_band_field(&g, &mut r, 0.7);
    let grid_l2 = l2_squared_values(&f.to_physical());
    assert!((grid_l2 - l2_squared(&f)).abs() <= 1e-10 * grid_l2);
}

fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(values in field_strategy(8)) {
        let g = SpectralGrid::new(8).unwrap();
        let f = SpectralField::from_physical(&g, &values).unwrap();
        prop_assert_eq!(f.hermitian_defect(), 0.0);
        for (a, b) in f.to_physical().iter().zip(&values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn frac_laplacian_composes(values in field_strategy(16), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let g = SpectralGrid::new(16).unwrap();
        let f = SpectralField::from_physical(&g, &values).unwrap().without_mean();
        let lhs = frac_laplacian(&frac_laplacian(&f, s).unwrap(), t).unwrap();
        let rhs = frac_laplacian(&f, s + t).unwrap();
        let scale = rhs.max_abs_coeff().max(1e-300);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn gevrey_filter_composes(values in field_strategy(16), t1 in 0.0f64..0.5, t2 in 0.0f64..0.5) {
        let g = SpectralGrid::new(16).unwrap();
        let f = SpectralField::from_physical(&g, &values).unwrap();
        let lhs = gevrey_filter(&gevrey_filter(&f, t1, 1.0).unwrap(), t2, 1.0).unwrap();
        let rhs = gevrey_filter(&f, t1 + t2, 1.0).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * rhs.max_abs_coeff());
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(vx in field_strategy(16), vy in field_strategy(16)) {
        let g = SpectralGrid::new(16).unwrap();
        let v = VectorField::new(
            SpectralField::from_physical(&g, &vx).unwrap(),
            SpectralField::from_physical(&g, &vy).unwrap(),
        ).unwrap();
        let p = leray_project(&v);
        let pp = leray_project(&p);
        prop_assert!(max_diff(&p.x, &pp.x) < 1e-15 && max_diff(&p.y, &pp.y) < 1e-15);
        for i in 0..g.len() {
            let (k1, k2) = g.wavevector(i);
            let d = p.x.coeffs()[i] * k1 as f64 + p.y.coeffs()[i] * k2 as f64;
            prop_assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn poisson_inverts_negative_laplacian(values in field_strategy(16)) {
        let g = SpectralGrid::new(16).unwrap();
        let rho = SpectralField::from_physical(&g, &values).unwrap().without_mean();
        let back = neg_laplacian(&solve_poisson(&rho));
        prop_assert!(max_diff(&back, &rho) <= 1e-12 * rho.max_abs_coeff());
    }

    #[test]
    fn perp_gradient_is_divergence_free(values in field_strategy(16)) {
        let g = SpectralGrid::new(16).unwrap();
        let f = SpectralField::from_physical(&g, &values).unwrap();
        prop_assert!(gradient(&f, GradientKind::Perp).divergence().max_abs_coeff() <= 1e-13 * f.max_abs_coeff().max(1e-300));
    }

    #[test]
    fn norms_are_nonnegative(values in field_strategy(8), tau in 0.0f64..1.0, m in 0.0f64..4.0) {
        let g = SpectralGrid::new(8).unwrap();
        let f = SpectralField::from_physical(&g, &values).unwrap();
        for kind in [NormKind::L2, NormKind::Linf, NormKind::L4, NormKind::Sobolev(m), NormKind::Gevrey { tau, m }] {
            prop_assert!(norm(&f, kind).unwrap() >= 0.0);
        }
    }
}
