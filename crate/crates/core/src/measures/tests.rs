use super::*;
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn lebesgue_transform_closed_form() {
    let s = Measure::lebesgue(-1.0, 1.0).unwrap();
    assert_relative_eq!(s.transform_real(2.0).unwrap(), 3f64.ln(), epsilon = 1e-14);
    let z = c(0.3, 0.7);
    let exact = ((z + 1.0) / (z - 1.0)).ln();
    assert!((s.cauchy_transform(z).unwrap() - exact).norm() < 1e-12);
}

#[test]
fn chebyshev_transform_closed_form() {
    let s = Measure::chebyshev(-1.0, 1.0).unwrap();
    assert_relative_eq!(s.mass(), PI, epsilon = 1e-13);
    assert_relative_eq!(
        s.transform_real(2.0).unwrap(),
        PI / 3f64.sqrt(),
        epsilon = 1e-13
    );
}

#[test]
fn point_on_support_rejected() {
    let s = Measure::lebesgue(-1.0, 1.0).unwrap();
    assert!(matches!(
        s.cauchy_transform(c(0.5, 0.0)),
        Err(Error::PointOnSupport { .. })
    ));
}

#[test]
fn product_mass_closed_form() {
    // ∫_{-1}^{1} log((x−2)/(x−3)) dx = ln(64/27)… with the sign convention ŝ(x) = ∫ dy/(x−y)
    let a = Measure::lebesgue(-1.0, 1.0).unwrap();
    let b = Measure::lebesgue(2.0, 3.0).unwrap();
    let p = Measure::product(&a, &b).unwrap();
    // ŝ_b(x) = ln((x−2)/(x−3)) < 0 on [−1,1]
    let exact = -((64.0f64 / 27.0).ln());
    assert_relative_eq!(p.mass(), exact, epsilon = 1e-12);
    assert_eq!(p.sign(), -1.0);
}

#[test]
fn overlapping_factor_rejected() {
    let a = Measure::lebesgue(-1.0, 1.0).unwrap();
    let b = Measure::lebesgue(0.5, 3.0).unwrap();
    assert!(matches!(
        Measure::product(&a, &b),
        Err(Error::OverlappingSupports { .. })
    ));
}

#[test]
fn derivates_are_interned_and_cancel() {
    let a = Measure::lebesgue(-1.0, 1.0).unwrap();
    let b = Measure::lebesgue(2.0, 3.0).unwrap();
    let p1 = Measure::product(&a, &b).unwrap();
    let p2 = Measure::product(&a, &b).unwrap();
    assert_eq!(p1, p2);
    let back = Measure::weighted_derivate(&p1, &[CauchyFactor::den(&b)]).unwrap();
    assert_eq!(back, a);
}

#[test]
fn chebyshev_inverse_is_semicircle() {
    // ŝ = π/√(z²−1) ⇒ 1/ŝ = z/π − (1/π)(z − √(z²−1)), τ = −√(1−x²)/π² dx
    let s = Measure::chebyshev(-1.0, 1.0).unwrap();
    let tau = Measure::inverse(&s).unwrap();
    assert_relative_eq!(tau.mass(), -1.0 / (2.0 * PI), epsilon = 1e-12);
    let ell = s.ell().unwrap();
    assert_relative_eq!(ell.a, 1.0 / PI, epsilon = 1e-13);
    assert!(ell.b.abs() < 1e-13);
}

#[test]
fn inverse_reproduces_reciprocal() {
    let s = Measure::lebesgue(-1.0, 1.0).unwrap();
    let tau = Measure::inverse(&s).unwrap();
    let ell = s.ell().unwrap();
    for z in [c(2.0, 1.0), c(0.0, 0.5), c(-1.3, 0.1), c(5.0, 0.0)] {
        let lhs = s.cauchy_transform(z).unwrap() * (ell.eval(z) + tau.cauchy_transform(z).unwrap());
        assert!((lhs - 1.0).norm() < 1e-9, "{z}: {lhs}");
    }
}

#[test]
fn inverse_of_derivate_reproduces_reciprocal() {
    let a = Measure::lebesgue(-1.0, 1.0).unwrap();
    let b = Measure::lebesgue(2.0, 3.0).unwrap();
    let p = Measure::product(&a, &b).unwrap();
    let tau = Measure::inverse(&p).unwrap();
    let ell = p.ell().unwrap();
    for z in [c(2.0, 1.0), c(0.0, 0.3), c(-6.0, 0.0)] {
        let lhs = p.cauchy_transform(z).unwrap() * (ell.eval(z) + tau.cauchy_transform(z).unwrap());
        assert!((lhs - 1.0).norm() < 1e-9, "{z}: {lhs}");
    }
}

#[test]
fn laurent_route_agrees_with_contour_route() {
    let s = Measure::lebesgue(2.0, 3.0).unwrap();
    let (ell, tau_l) = inverse_measure(&s, 12).unwrap();
    let tau = Measure::inverse(&s).unwrap();
    let e2 = s.ell().unwrap();
    assert_relative_eq!(ell.a, e2.a, epsilon = 1e-12);
    assert_relative_eq!(ell.b, e2.b, epsilon = 1e-12);
    for z in [c(5.0, 0.0), c(2.5, 2.0), c(-1.0, 0.0)] {
        let d = tau_l.cauchy_transform(z).unwrap() - tau.cauchy_transform(z).unwrap();
        assert!(d.norm() < 1e-8, "{z}: {d}");
    }
}

#[test]
fn discrete_measure_inverse() {
    // s = δ_0 + δ_1: 1/ŝ = z/2 − 1/4 − (1/8)/(z − 1/2)
    let s = Measure::from_rule(
        QuadratureRule {
            nodes: vec![0.0, 1.0],
            weights: vec![1.0, 1.0],
        },
        "pair",
    )
    .unwrap();
    let tau = Measure::inverse(&s).unwrap();
    let r = tau.default_rule().unwrap();
    assert_eq!(r.len(), 1);
    assert_relative_eq!(r.nodes[0], 0.5, epsilon = 1e-12);
    assert_relative_eq!(r.weights[0], -0.125, epsilon = 1e-12);
}

#[test]
fn moments_roundtrip() {
    let s = Measure::lebesgue(0.0, 1.0).unwrap();
    let m = s.moments(10, 1e-15).unwrap();
    let back = Measure::from_moments(&m).unwrap();
    for k in 0..10 {
        let mk = back.integrate(|x| x.powi(k), 0.0).unwrap();
        assert_relative_eq!(mk, 1.0 / (k as f64 + 1.0), epsilon = 1e-12);
    }
}

#[test]
fn descriptor_roundtrip() {
    let d = MeasureDescriptor::lebesgue(2.0, 3.0);
    let m = d.build().unwrap();
    assert_eq!(m.descriptor().unwrap(), d);
    let cheb = Measure::chebyshev(0.0, 2.0).unwrap();
    assert_eq!(cheb.descriptor().unwrap().kind, "chebyshev");
}

#[test]
fn adaptive_integration_converges() {
    let s = Measure::lebesgue(0.0, 1.0).unwrap();
    let v = s.integrate(|x| (30.0 * x).cos(), 1e-14).unwrap();
    assert_relative_eq!(v, 30f64.sin() / 30.0, epsilon = 1e-14);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn transform_is_real_and_signed_off_support(a in -3.0f64..3.0, w in 0.2f64..2.0, x in 3.5f64..20.0) {
            let s = Measure::lebesgue(a, a + w).unwrap();
            let v = s.cauchy_transform(C64::new(a + w + x - 3.0 + 0.1, 0.0)).unwrap();
            prop_assert!(v.im.abs() < 1e-14);
            prop_assert!(v.re > 0.0);
        }

        #[test]
        fn transform_decays_like_mass_over_z(a in -2.0f64..2.0, w in 0.2f64..2.0) {
            let s = Measure::lebesgue(a, a + w).unwrap();
            let z = C64::new(1e6, 3e5);
            let v = s.cauchy_transform(z).unwrap() * z;
            prop_assert!((v.re - w).abs() < 1e-5 * w);
        }

        #[test]
        fn inverse_identity_holds(a in -2.0f64..2.0, w in 0.3f64..2.0, y in 0.2f64..3.0) {
            let s = Measure::lebesgue(a, a + w).unwrap();
            let tau = Measure::inverse(&s).unwrap();
            let ell = s.ell().unwrap();
            let z = C64::new(a + 0.5 * w, y);
            let lhs = s.cauchy_transform(z).unwrap() * (ell.eval(z) + tau.cauchy_transform(z).unwrap());
            prop_assert!((lhs - 1.0).norm() < 1e-9);
            prop_assert!(tau.sign() == -s.sign());
        }
    }
}
