use super::*;
use crate::hermite_pade::{solve_mixed, MultiIndex2};
use crate::measures::Measure;
use crate::nikishin::MixedSystem;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn leb(a: f64, b: f64) -> Measure {
    Measure::lebesgue(a, b).unwrap()
}

fn tail(m: usize) -> NikishinSystem {
    let all = [
        (2.0, 3.0),
        (-1.0, 1.0),
        (4.0, 5.0),
        (-3.0, -2.0),
        (6.0, 7.0),
    ];
    NikishinSystem::build(all[..m].iter().map(|&(a, b)| leb(a, b)).collect()).unwrap()
}

fn random_p(n: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    n.iter()
        .map(|&k| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn keys(sys: &NikishinSystem) -> Vec<String> {
    sys.generators()
        .iter()
        .map(|g| g.key().to_string())
        .collect()
}

fn first_max(n: &[usize]) -> usize {
    let max = *n[1..].iter().max().unwrap();
    (1..n.len()).find(|&k| n[k] == max).unwrap()
}

#[test]
fn identity_suite_within_tolerance() {
    for id in IdentityId::ALL {
        let case = IdentityCase::standard(id).unwrap();
        let r = verify_identity(&case, &standard_probes()).unwrap();
        assert!(r < id.tolerance(), "{id}: {r:e}");
    }
}

#[test]
fn ratio_identity_constant_at_infinity() {
    // ŝ_{αβ}/σ̂_α → |⟨σ_α,σ_β⟩|/|σ_α| as z → ∞
    let b = Bindings::standard().unwrap();
    let sab = Measure::product(&b.alpha, &b.beta).unwrap();
    let z = C64::new(1e6, 0.0);
    let v = sab.cauchy_transform(z).unwrap() / b.alpha.cauchy_transform(z).unwrap();
    assert!((v.re - sab.mass() / b.alpha.mass()).abs() < 1e-5);
}

#[test]
fn identity_rejects_probe_on_support() {
    let case = IdentityCase::standard(IdentityId::P21).unwrap();
    let e = verify_identity(&case, &[C64::new(0.2, 0.0)]).unwrap_err();
    assert!(matches!(e, crate::Error::PointOnSupport { .. }));
}

#[test]
fn overlapping_bindings_rejected() {
    let mut b = Bindings::standard().unwrap();
    b.beta = leb(0.5, 2.0);
    assert!(IdentityCase::new(IdentityId::P22, b).is_err());
}

#[test]
fn table_rows_and_hash_are_stable() {
    let rows = identity_table(&standard_probes()).unwrap();
    assert_eq!(rows.len(), 30);
    let h = Bindings::standard().unwrap().hash();
    assert_eq!(h, Bindings::standard().unwrap().hash());
    assert!(rows.iter().all(|r| r.bindings_hash == format!("{h:016x}")));
}

#[test]
fn division_by_first_function() {
    // n* = (n_1, n_0, n_2, …), 𝓝(τ_{1,1}, ⟨σ_2,σ_1⟩, σ_3) and p*_1 = p_0, p*_k = −p_k
    let t = tail(3);
    let r = lemma4_transform(&t, &[1, 2, 1, 0], 1).unwrap();
    assert_eq!(r.n_star, vec![2, 1, 1, 0]);
    assert_eq!(
        r.system_star.sigma(0),
        &Measure::inverse(t.sigma(0)).unwrap()
    );
    assert_eq!(
        r.system_star.sigma(1),
        &Measure::product(t.sigma(1), t.sigma(0)).unwrap()
    );
    assert_eq!(r.system_star.sigma(2), t.sigma(2));
    let q = r
        .coeff_map
        .apply(&[vec![0.7], vec![0.2, 0.3], vec![0.4], vec![]])
        .unwrap();
    assert_eq!(q[1], vec![0.7]);
    assert_eq!(q[2], vec![-0.4]);
}

#[test]
fn division_rejects_dominant_first_entry() {
    let t = tail(2);
    for (n, j) in [(vec![2, 1, 1], 1), (vec![2, 2, 1], 1), (vec![1, 2, 3], 1)] {
        let e = lemma4_transform(&t, &n, j).unwrap_err();
        assert!(matches!(e, crate::Error::PreconditionViolated(_)), "{n:?}");
    }
}

#[test]
fn second_function_branch_a() {
    // max{n_0, n_1} = n_0: n* = (n_2, n_0, n_1, n_3), 𝓝(τ_{1,2}, ⟨τ_{2,2}, s_{1,2}⟩, s_{3,2})
    let t = tail(3);
    let n = [1, 0, 2, 1];
    let r = lemma4_transform(&t, &n, 2).unwrap();
    assert_eq!(r.n_star, vec![2, 1, 0, 1]);
    let c = Chains(&t);
    assert_eq!(r.system_star.sigma(0), &c.tau(1, 2).unwrap());
    assert_eq!(
        r.system_star.sigma(1),
        &Measure::product(&c.tau(2, 2).unwrap(), &c.s(1, 2).unwrap()).unwrap()
    );
    assert_eq!(r.system_star.sigma(2), &c.s(3, 2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for z in standard_probes() {
        let p = random_p(&n, &mut rng);
        assert!(r.defect(&t, &p, z).unwrap() < 1e-7);
    }
}

#[test]
fn tables_agree_with_recurrence() {
    // every branch pattern for j ≤ 4
    let t = tail(5);
    let mut seen = std::collections::HashSet::new();
    for code in 0..4usize.pow(5) {
        let mut n: Vec<usize> = (0..5).map(|i| (code / 4usize.pow(i)) % 4).collect();
        n.push(0);
        if n[1..].iter().max().unwrap() <= &n[0] {
            continue;
        }
        let j = first_max(&n);
        if j > 4 {
            continue;
        }
        let a = lemma4_table(&t, &n, j).unwrap();
        if !seen.insert((j, a.branches.clone())) {
            continue;
        }
        let b = lemma4_recurrence(&t, &n, j).unwrap();
        assert_eq!(keys(&a.system_star), keys(&b.system_star), "{n:?}");
        assert_eq!(a.coeff_map, b.coeff_map);
    }
    assert_eq!(seen.len(), 1 + 2 + 4 + 8);
}

#[test]
fn recurrence_beyond_tables() {
    let t = tail(5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [
        vec![1, 2, 0, 2, 1, 3],
        vec![2, 0, 1, 1, 2, 3],
        vec![0, 0, 0, 0, 0, 1],
    ] {
        let r = lemma4_transform(&t, &n, 5).unwrap();
        for z in standard_probes() {
            let p = random_p(&n, &mut rng);
            let d = r.defect(&t, &p, z).unwrap();
            assert!(d < 1e-7, "{n:?}: {d:e}");
        }
    }
}

#[test]
fn explicit_map_matches_fit() {
    let t = tail(3);
    for n in [vec![0, 2, 1, 1], vec![1, 1, 3, 2], vec![2, 1, 2, 3]] {
        let j = first_max(&n);
        let r = lemma4_transform(&t, &n, j).unwrap();
        let (fit, res) = fit_coeff_map(&t, &n, j, &r.system_star, &r.n_star).unwrap();
        assert!(res < 1e-10, "{n:?}: {res:e}");
        // Coefficients are only determined up to near-null directions of the
        // collocation matrix; the two routes must agree as functions.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let p = random_p(&n, &mut rng);
            let (qe, qf) = (r.coeff_map.apply(&p).unwrap(), fit.apply(&p).unwrap());
            for z in [C64::new(4.0, 1.5), C64::new(-2.5, -0.5), C64::new(0.3, 2.2)] {
                let (ve, se) = linear_form(Some(&r.system_star), &qe, z).unwrap();
                let (vf, _) = linear_form(Some(&r.system_star), &qf, z).unwrap();
                assert!(
                    (ve - vf).norm() <= 1e-9 * se,
                    "{n:?} at {z}: {:e}",
                    (ve - vf).norm() / se
                );
            }
        }
    }
    // A well-conditioned shape pins the coefficients themselves.
    let n = vec![0, 2, 1, 1];
    let r = lemma4_transform(&t, &n, 1).unwrap();
    let (fit, _) = fit_coeff_map(&t, &n, 1, &r.system_star, &r.n_star).unwrap();
    assert!((&fit.matrix - &r.coeff_map.matrix).abs().max() < 1e-9);
}

#[test]
fn reorder_identity_when_decreasing() {
    let t = tail(2);
    let r = theorem3_reduce(&t, &[3, 2, 2]).unwrap();
    assert_eq!(r.lambda, vec![0, 1, 2]);
    assert_eq!(r.factor, 0);
    assert_eq!(keys(&r.system), keys(&t));
    assert!(
        (&r.coeff_map.matrix - nalgebra::DMatrix::<f64>::identity(7, 7))
            .abs()
            .max()
            < 1e-9
    );
}

#[test]
fn reorder_single_swap() {
    let t = tail(1);
    let r = theorem3_reduce(&t, &[1, 2]).unwrap();
    assert_eq!(r.lambda, vec![1, 0]);
    assert_eq!(r.system.sigma(0), &Measure::inverse(t.sigma(0)).unwrap());
}

#[test]
fn reorder_three_components() {
    let t = tail(2);
    let n = [1, 2, 1];
    let r = theorem3_reduce(&t, &n).unwrap();
    assert_eq!(r.n_sorted, vec![2, 1, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for z in standard_probes() {
        let p = random_p(&n, &mut rng);
        assert!(r.defect(&t, &p, z).unwrap() < 1e-7);
    }
}

#[test]
fn reorder_needs_inner_division() {
    // n_0 dominant but the rest unsorted: the inner form is divided
    let t = tail(3);
    let n = [3, 1, 2, 2];
    let r = theorem3_reduce(&t, &n).unwrap();
    assert_eq!(r.factor, 0);
    assert!(r.divisions >= 1);
    assert_eq!(r.n_sorted, vec![3, 2, 2, 1]);
    assert_eq!(r.lambda, vec![0, 2, 3, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for z in standard_probes() {
        let p = random_p(&n, &mut rng);
        assert!(r.defect(&t, &p, z).unwrap() < 1e-7);
    }
}

fn demo11() -> MixedSystem {
    let base = leb(-1.0, 1.0);
    MixedSystem::new(
        NikishinSystem::build(vec![base.clone(), leb(2.0, 3.0)]).unwrap(),
        NikishinSystem::build(vec![base, leb(-4.0, -3.0)]).unwrap(),
    )
    .unwrap()
}

#[test]
fn transferred_orthogonality_single_swap() {
    let mix = demo11();
    let idx = MultiIndex2::new(vec![1, 1], vec![0, 1]);
    let form = solve_mixed(&mix, &idx).unwrap();
    let rep = theorem4_check(&mix, &idx, &form).unwrap();
    assert_eq!(rep.lambda, vec![1, 0]);
    assert!(
        rep.residuals.iter().all(|&r| r <= 1e-8 * rep.scale),
        "{rep:?}"
    );
}

#[test]
fn transferred_orthogonality_without_reordering() {
    let mix = demo11();
    let idx = MultiIndex2::new(vec![2, 2], vec![2, 1]);
    let form = solve_mixed(&mix, &idx).unwrap();
    let rep = theorem4_check(&mix, &idx, &form).unwrap();
    let (direct, scale) = form.orthogonality_residuals().unwrap();
    assert_eq!(rep.lambda, vec![0, 1]);
    for (a, b) in rep.residuals.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn zero_bound_for_dominant_first_entry() {
    let t = tail(1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        for n in [vec![2, 1], vec![1, 1]] {
            let p = random_p(&n, &mut rng);
            assert!(lemma3_reduced_zero_check(Some(&t), &n, &p).unwrap());
        }
    }
    assert!(lemma3_reduced_zero_check(None, &[3], &[vec![1.0, 0.0, 2.0]]).unwrap());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn division_permutes_the_index(n in proptest::collection::vec(0usize..4, 4)) {
            prop_assume!(n[1..].iter().max().unwrap() > &n[0]);
            let j = first_max(&n);
            let r = lemma4_transform(&tail(3), &n, j).unwrap();
            let (mut a, mut b) = (n.clone(), r.n_star.clone());
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert!(r.permutation.iter().zip(&r.n_star).all(|(&i, &v)| n[i] == v));
        }

        #[test]
        fn reorder_map_shape(n in proptest::collection::vec(0usize..4, 3)) {
            let r = theorem3_reduce(&tail(2), &n).unwrap();
            prop_assert!(r.n_sorted.windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(r.coeff_map.matrix.nrows(), r.n_sorted.iter().sum::<usize>());
            for (k, &l) in r.lambda.iter().enumerate() {
                prop_assert_eq!(r.coeff_map.output[k], n[l]);
            }
        }

        #[test]
        fn identities_hold_off_support(re in -8.0f64..8.0, im in 0.6f64..6.0, which in 0usize..10) {
            let id = IdentityId::ALL[which];
            let case = IdentityCase::standard(id).unwrap();
            let z = C64::new(re, im);
            let probes = filter_probes(&case.bindings, &[z], 0.5);
            prop_assume!(!probes.is_empty());
            prop_assert!(verify_identity(&case, &probes).unwrap() < id.tolerance());
        }
    }
}
