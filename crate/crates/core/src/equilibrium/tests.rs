use super::*;
use approx::assert_relative_eq;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use crate::hermite_pade::MultiIndex2;
use crate::measures::{Interval, Measure};
use crate::nikishin::{MixedSystem, NikishinSystem};

fn iv(a: f64, b: f64) -> Vec<Interval> {
    vec![Interval::new(a, b).unwrap()]
}

fn arcsine_cdf(x: f64) -> f64 {
    0.5 + x.clamp(-1.0, 1.0).asin() / PI
}

fn scalar(support: Vec<Interval>, opts: EquilibriumOptions) -> EquilibriumSolution {
    let c = build_interaction(&[1.0], &[1.0]).unwrap();
    solve_vector_equilibrium(&c, &[support], &opts).unwrap()
}

fn grid(grid: usize) -> EquilibriumOptions {
    EquilibriumOptions {
        grid,
        ..Default::default()
    }
}

fn classical() -> MixedSystem {
    MixedSystem::type2(&NikishinSystem::build(vec![Measure::lebesgue(-1.0, 1.0).unwrap()]).unwrap())
}

fn demo01() -> MixedSystem {
    let sys = NikishinSystem::build(vec![
        Measure::lebesgue(-1.0, 1.0).unwrap(),
        Measure::lebesgue(2.0, 3.0).unwrap(),
    ])
    .unwrap();
    MixedSystem::type2(&sys)
}

#[test]
fn scalar_interaction_is_one() {
    let c = build_interaction(&[1.0], &[1.0]).unwrap();
    assert_eq!(c.dim(), 1);
    assert_eq!(c.c(0, 0), 1.0);
}

#[test]
fn two_component_interaction() {
    let c = build_interaction(&[0.5, 0.5], &[1.0]).unwrap();
    assert_eq!(c.dim(), 2);
    assert_eq!(c.c(0, 0), 1.0);
    assert_eq!(c.c(1, 1), 0.25);
    assert_eq!(c.c(0, 1), -0.25);
    assert!(c.is_symmetric() && c.is_psd());
}

#[test]
fn tails_follow_the_decreasing_reordering() {
    let c = build_interaction(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
    assert_relative_eq!(c.big_p(1), 0.3, epsilon = 1e-15);
    assert_relative_eq!(c.big_p(-1), 0.5, epsilon = 1e-15);
    assert_relative_eq!(c.big_p(-2), 0.2, epsilon = 1e-15);
    assert_eq!(c.big_p(0), 1.0);
    assert_relative_eq!(c.c(-2, -1), -0.05, epsilon = 1e-15);
}

#[test]
fn bad_probability_vectors() {
    for (p1, p2) in [
        (vec![0.5, 0.6], vec![1.0]),
        (vec![1.0, 0.0], vec![1.0]),
        (vec![], vec![1.0]),
        (vec![1.0], vec![0.9]),
    ] {
        assert!(matches!(
            build_interaction(&p1, &p2),
            Err(crate::Error::BadProbabilityVector(_))
        ));
    }
}

fn prob_vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, 1..=max_len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        let mut p: Vec<f64> = v.iter().map(|x| x / s).collect();
        let rest: f64 = p[1..].iter().sum();
        p[0] = 1.0 - rest;
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn interaction_is_symmetric_psd(p1 in prob_vector(4), p2 in prob_vector(4)) {
        let c = build_interaction(&p1, &p2).unwrap();
        prop_assert!(c.is_symmetric());
        prop_assert!(c.is_psd());
        prop_assert_eq!(c.big_p(0), 1.0);
        prop_assert_eq!(c.dim(), p1.len() + p2.len() - 1);
    }
}

#[test]
fn arcsine_measure_and_robin_constant() {
    let s = scalar(iv(-1.0, 1.0), grid(512));
    let mu = &s.measures[0];
    assert_relative_eq!(mu.total(), 1.0, epsilon = 1e-12);
    assert!(mu.masses.iter().all(|&m| m >= 0.0));
    assert!(mu.tv_distance(arcsine_cdf) < 2e-2);
    assert_relative_eq!(mu.mass_between(-0.5, 0.5), 1.0 / 3.0, epsilon = 1e-3);
    assert_relative_eq!(s.constants[0], LN_2, epsilon = 1e-3);
    assert!(s.residual < 5e-3);
}

#[test]
fn energy_never_increases() {
    let s = scalar(
        iv(-1.0, 1.0),
        EquilibriumOptions {
            grid: 128,
            seed: Some(3),
            ..Default::default()
        },
    );
    assert!(s.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-13));
}

#[test]
fn doubling_the_set_lowers_the_constant_by_ln2() {
    let a = scalar(iv(-1.0, 1.0), grid(256));
    let b = scalar(iv(-2.0, 2.0), grid(256));
    assert_relative_eq!(a.constants[0] - b.constants[0], LN_2, epsilon = 1e-6);
}

#[test]
fn constant_field_shifts_only_the_constant() {
    let f: Field = Arc::new(|x: f64| 0.3 * x * x);
    let g: Field = Arc::new(|x: f64| 0.3 * x * x + 0.7);
    let a = scalar(
        iv(-1.0, 1.0),
        EquilibriumOptions {
            grid: 256,
            fields: vec![Some(f)],
            ..Default::default()
        },
    );
    let b = scalar(
        iv(-1.0, 1.0),
        EquilibriumOptions {
            grid: 256,
            fields: vec![Some(g)],
            ..Default::default()
        },
    );
    assert_relative_eq!(b.constants[0] - a.constants[0], 0.7, epsilon = 1e-8);
    let tv: f64 = a.measures[0]
        .masses
        .iter()
        .zip(&b.measures[0].masses)
        .map(|(x, y)| (x - y).abs())
        .sum();
    assert!(tv < 1e-4, "{tv}");
}

#[test]
fn random_starts_reach_the_same_minimum() {
    let c = build_interaction(&[1.0], &[0.5, 0.5]).unwrap();
    let sup = supports(&demo01());
    let run = |seed| {
        solve_vector_equilibrium(
            &c,
            &sup,
            &EquilibriumOptions {
                grid: 512,
                seed: Some(seed),
                ..Default::default()
            },
        )
        .unwrap()
    };
    let (a, b) = (run(1), run(2));
    assert!((a.energy - b.energy).abs() < 1e-6);
    for (ma, mb) in a.measures.iter().zip(&b.measures) {
        let tv = 0.5
            * ma.masses
                .iter()
                .zip(&mb.masses)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>();
        assert!(tv < 1e-2, "{tv}");
    }
}

#[test]
fn two_component_conditions_hold() {
    let c = build_interaction(&[1.0], &[0.5, 0.5]).unwrap();
    let s = solve_vector_equilibrium(&c, &supports(&demo01()), &grid(256)).unwrap();
    assert!(s.residual < 5e-3, "{}", s.residual);
    // W_j is flat on the support of μ_j
    for j in [-1i64, 0] {
        let mu = s.measure(j);
        for (i, &x) in mu.grid.iter().enumerate().step_by(17) {
            if mu.masses[i] > 1e-8 {
                let w = s.combined_potential(j, C64::new(x, 0.0));
                assert!((w - s.constant(j)).abs() < 5e-3, "{j} {x} {w}");
            }
        }
    }
}

#[test]
fn residual_halves_under_refinement() {
    let a = scalar(iv(-1.0, 1.0), grid(128));
    let b = scalar(iv(-1.0, 1.0), grid(256));
    let ratio = b.residual / a.residual;
    assert!((0.4..0.6).contains(&ratio), "{ratio}");
}

#[test]
fn g_for_the_classical_case() {
    let s = scalar(iv(-1.0, 1.0), grid(512));
    assert_relative_eq!(
        g_function(&s, C64::new(2.0, 0.0)).unwrap(),
        (2.0 + 3f64.sqrt()) / 2.0,
        max_relative = 1e-4
    );
    let z = C64::new(0.3, 1.7);
    assert_relative_eq!(
        g_function(&s, z).unwrap(),
        g_function(&s, z.conj()).unwrap(),
        max_relative = 1e-14
    );
    assert!(matches!(
        g_function(&s, C64::new(0.2, 0.0)),
        Err(crate::Error::PointOnSupport { .. })
    ));
}

#[test]
fn g_grows_like_the_leading_degree() {
    let c = build_interaction(&[0.5, 0.5], &[1.0]).unwrap();
    let s = solve_vector_equilibrium(&c, &[iv(-1.0, 1.0), iv(2.0, 3.0)], &grid(128)).unwrap();
    let z = C64::new(600.0, 800.0);
    let rate = (g_function(&s, z * 2.0).unwrap() / g_function(&s, z).unwrap()).ln() / LN_2;
    assert_relative_eq!(rate, c.big_p(0) - c.big_p(1), epsilon = 1e-3);
}

#[test]
fn weighted_norm_roots_approach_exp_minus_w() {
    let s = scalar(iv(-1.0, 1.0), grid(256));
    let f = crate::hermite_pade::solve_mixed(&classical(), &MultiIndex2::new(vec![17], vec![16]))
        .unwrap()
        .monic_normalize()
        .unwrap();
    let rule = classical().base().rule(40).unwrap();
    let norm: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f.eval_real(x).unwrap().powi(2))
        .sum();
    let root = norm.sqrt().powf(1.0 / 16.0);
    assert_relative_eq!(root, (-s.constants[0]).exp(), max_relative = 0.05);
}

#[test]
fn period_steps() {
    assert_eq!(lcm_step(1, 0), MultiIndex2::new(vec![1, 1], vec![2]));
    assert_eq!(lcm_step(0, 1), MultiIndex2::new(vec![2], vec![1, 1]));
    assert_eq!(lcm_step(1, 1), MultiIndex2::new(vec![1, 1], vec![1, 1]));
    assert_eq!(lcm_step(1, 2), MultiIndex2::new(vec![3, 3], vec![2, 2, 2]));
}

#[test]
fn rays_keep_the_mixed_balance() {
    let ray = IndexRay::new(MultiIndex2::new(vec![1], vec![0, 0]), lcm_step(0, 1)).unwrap();
    assert_eq!(ray.at(3), MultiIndex2::new(vec![7], vec![3, 3]));
    assert!(IndexRay::new(
        MultiIndex2::new(vec![1], vec![0]),
        MultiIndex2::new(vec![2], vec![1])
    )
    .is_err());
}

#[test]
fn classical_nth_root_and_ratio() {
    let mix = classical();
    let ray = IndexRay::new(
        MultiIndex2::new(vec![1], vec![0]),
        MultiIndex2::new(vec![1], vec![1]),
    )
    .unwrap();
    let sol = ray_equilibrium(&mix, &ray, &grid(512)).unwrap();
    let z2 = C64::new(2.0, 0.0);
    let t = nth_root_compare(&mix, &ray, &[16], &[z2], &sol).unwrap();
    let q = (t.rows[0].log_abs[0] / 16.0).exp();
    assert!(
        ((q - 1.866_025_403_784_438_6) / 1.866_025_403_784_438_6).abs() < 0.02,
        "{q}"
    );
    // a large real probe is dominated by the leading monomial
    let big = C64::new(1e6, 0.0);
    let t = nth_root_compare(&mix, &ray, &[8], &[big], &sol).unwrap();
    assert_relative_eq!(
        (t.rows[0].log_abs[0] / 8.0).exp() / 1e6,
        1.0,
        max_relative = 1e-6
    );

    let r = ratio_experiment(&mix, &ray, &[15, 16], &[C64::new(3.0, 0.0)], true).unwrap();
    let last = r.rows.last().unwrap().ratio[0];
    assert!(
        ((last[0] - (3.0 + 2.0 * 2f64.sqrt())) / 5.828).abs() < 0.01,
        "{last:?}"
    );
    assert!(last[1].abs() < 1e-12);
}
