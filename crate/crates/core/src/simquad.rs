//! Simultaneous Gauss–Jacobi-type quadrature from the zeros of type II
//! polynomials, and measured Markov convergence rates against the conformal
//! bound δ_K.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite_pade::{type2_pade, Type2Approximant};
use crate::measures::Interval;
use crate::nikishin::NikishinSystem;
use crate::par;

/// Nodes shared by all k and weights λ[k][i] for ∫ · ds_{0,k}.
#[derive(Clone, Debug, Serialize)]
pub struct SimultaneousRule {
    pub n: Vec<usize>,
    pub nodes: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl SimultaneousRule {
    pub fn total(&self) -> usize {
        self.nodes.len()
    }
}

/// Builds the rule for index `n`: nodes are the zeros of Q_n, and
/// λ[k][i] = ∫ Q_n(x)/(x − x_i) ds_{0,k}(x) / Q_n'(x_i), the quotient being
/// formed by synthetic division so nothing cancels at the node.
pub fn build_rule(sys: &NikishinSystem, n: &[usize]) -> Result<SimultaneousRule> {
    let approx = type2_pade(sys, n)?;
    rule_from_approximant(&approx)
}

pub fn rule_from_approximant(approx: &Type2Approximant) -> Result<SimultaneousRule> {
    let q = &approx.q;
    let dq = q.derivative();
    let mut nodes = approx.form.zeros_in_hull()?;
    // Newton polish on Q itself; the bracketing search stops at 1e-12.
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let d = dq.eval(*x);
            if d != 0.0 {
                *x -= q.eval(*x) / d;
            }
        }
    }
    let total = approx.total();
    let sys = &approx.sys;
    let quotients: Vec<_> = nodes.iter().map(|&x| q.divide_linear(x).0).collect();
    let mut weights = vec![];
    for k in 0..=sys.m() {
        let rule = sys.s(0, k)?.rule(2 * total + 64)?;
        let row: Vec<f64> = nodes
            .iter()
            .zip(&quotients)
            .map(|(&xi, quot)| rule.apply(|x| quot.eval(x)) / dq.eval(xi))
            .collect();
        weights.push(row);
    }
    Ok(SimultaneousRule {
        n: approx.n.clone(),
        nodes,
        weights,
    })
}

/// Largest relative error of the rule on t^d, t the hull coordinate of
/// σ_0, over every k and d ≤ |n| + n_k − 1. The scale for each test is
/// max(|∫t^d ds_{0,k}|, Σ|λ t_i^d|, |s_{0,k}|).
pub fn exactness_test(rule: &SimultaneousRule, sys: &NikishinSystem) -> Result<f64> {
    exactness_to(rule, sys, |k| rule.total() + rule.n[k])
}

/// As [`exactness_test`] but with an arbitrary number of degrees per k.
pub fn exactness_to(
    rule: &SimultaneousRule,
    sys: &NikishinSystem,
    degrees: impl Fn(usize) -> usize,
) -> Result<f64> {
    let hull = sys.hull(0);
    let mut worst = 0.0f64;
    for (k, lam) in rule.weights.iter().enumerate() {
        let s = sys.s(0, k)?;
        let reference = s.rule(2 * rule.total() + 96)?;
        let mass = s.mass().abs();
        for d in 0..degrees(k) {
            let exact = reference.apply(|x| hull.to_unit(x).powi(d as i32));
            let (mut approx, mut abs) = (0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(lam) {
                let v = w * hull.to_unit(x).powi(d as i32);
                approx += v;
                abs += v.abs();
            }
            let scale = exact.abs().max(abs).max(mass);
            worst = worst.max((exact - approx).abs() / scale);
        }
    }
    Ok(worst)
}

/// Σ_i λ[k][i] f(x_i) for every k.
pub fn integrate_simultaneously(rule: &SimultaneousRule, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let fx: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
    rule.weights
        .iter()
        .map(|lam| lam.iter().zip(&fx).map(|(w, v)| w * v).sum())
        .collect()
}

/// Conformal map of the complement of `hull` onto the unit disk sending t
/// (None for ∞) to 0 with positive derivative there.
pub fn phi_t(hull: Interval, t: Option<f64>, z: C64) -> Result<C64> {
    let off = |w: C64| -> Result<()> {
        if hull.dist(w) <= 1e-12 * hull.len() {
            return Err(Error::PointOnSupport {
                re: w.re,
                im: w.im,
                a: hull.a,
                b: hull.b,
            });
        }
        Ok(())
    };
    off(z)?;
    let u = |w: C64| -> C64 {
        let s = (w - hull.center()) / hull.half();
        1.0 / (s + (s - 1.0).sqrt() * (s + 1.0).sqrt())
    };
    match t {
        None => Ok(u(z)),
        Some(t) => {
            off(C64::new(t, 0.0))?;
            let a = u(C64::new(t, 0.0));
            // u decreases along the real axis off the hull, so the rotation is −1.
            Ok(-(u(z) - a) / (1.0 - a.conj() * u(z)))
        }
    }
}

/// max over t ∈ Co(supp σ_1) (64 Chebyshev points) ∪ {∞} of |φ_t(z)|;
/// only ∞ when m = 0.
pub fn delta_at(sys: &NikishinSystem, z: C64) -> Result<f64> {
    let h0 = sys.hull(0);
    let mut best = phi_t(h0, None, z)?.norm();
    if sys.m() >= 1 {
        let h1 = sys.hull(1);
        for i in 0..64 {
            let t = h1.from_unit((std::f64::consts::PI * (i as f64 + 0.5) / 64.0).cos());
            best = best.max(phi_t(h0, Some(t), z)?.norm());
        }
        best = best
            .max(phi_t(h0, Some(h1.a), z)?.norm())
            .max(phi_t(h0, Some(h1.b), z)?.norm());
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub n: Vec<usize>,
    pub total: usize,
    /// max_k |ŝ_{0,k} − P_{n,k}/Q_n| at each probe.
    pub errors: Vec<f64>,
    pub e_n: f64,
    pub root: f64,
    /// errors[i]^{1/(2|n|)}.
    pub probe_roots: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub probes: Vec<(f64, f64)>,
    pub delta_per_probe: Vec<f64>,
    pub delta_k: f64,
    pub rows: Vec<RateRow>,
}

/// Indices of total 1..=max_total that fill components round-robin:
/// (1,0,…), (1,1,0,…), …; every component stays within one of |n|/(m+1).
pub fn diagonal_sequence(parts: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut n = vec![0; parts];
    (0..max_total)
        .map(|i| {
            n[i % parts] += 1;
            n.clone()
        })
        .collect()
}

/// Measured errors of the type II approximants along `indices` (computed in
/// parallel) together with δ_K for the probe set.
pub fn markov_rate(
    sys: &NikishinSystem,
    indices: &[Vec<usize>],
    probes: &[C64],
) -> Result<RateReport> {
    let delta_per_probe: Vec<f64> = probes
        .iter()
        .map(|&z| delta_at(sys, z))
        .collect::<Result<_>>()?;
    let delta_k = delta_per_probe.iter().cloned().fold(0.0, f64::max);
    let rows = par::map(indices, |n| -> Result<RateRow> {
        let approx = type2_pade(sys, n)?;
        let total = approx.total();
        let mut errors = vec![0.0f64; probes.len()];
        for k in 0..=sys.m() {
            for (e, &z) in errors.iter_mut().zip(probes) {
                *e = e.max(approx.markov_error(k, z)?.norm());
            }
        }
        let e_n = errors.iter().cloned().fold(0.0, f64::max);
        let p = 1.0 / (2 * total) as f64;
        Ok(RateRow {
            n: n.clone(),
            total,
            root: e_n.powf(p),
            probe_roots: errors.iter().map(|e| e.powf(p)).collect(),
            errors,
            e_n,
        })
    });
    Ok(RateReport {
        probes: probes.iter().map(|z| (z.re, z.im)).collect(),
        delta_per_probe,
        delta_k,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn leb(a: f64, b: f64) -> Measure {
        Measure::lebesgue(a, b).unwrap()
    }

    fn demo() -> NikishinSystem {
        NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 3.0)]).unwrap()
    }

    #[test]
    fn gauss_legendre_two_points() {
        let sys = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        let r = build_rule(&sys, &[2]).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -x, epsilon = 1e-12);
        assert_relative_eq!(r.nodes[1], x, epsilon = 1e-12);
        assert_relative_eq!(r.weights[0][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.weights[0][1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exactness_stops_past_the_degree_bound() {
        let sys = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        let r = build_rule(&sys, &[2]).unwrap();
        let x4: f64 = integrate_simultaneously(&r, |x| x.powi(4))[0];
        assert_relative_eq!(x4, 2.0 / 9.0, epsilon = 1e-12);
        assert!(exactness_test(&r, &sys).unwrap() < 1e-12);
        assert!(exactness_to(&r, &sys, |_| 5).unwrap() > 0.05);
    }

    #[test]
    fn constant_reproduces_masses() {
        let sys = demo();
        let r = build_rule(&sys, &[3, 4]).unwrap();
        let ones = integrate_simultaneously(&r, |_| 1.0);
        for (k, v) in ones.iter().enumerate() {
            assert_relative_eq!(*v, sys.s(0, k).unwrap().mass(), max_relative = 1e-10);
        }
    }

    #[test]
    fn weight_signs_follow_masses() {
        let sys = demo();
        let r = build_rule(&sys, &[1, 2]).unwrap();
        for (k, lam) in r.weights.iter().enumerate() {
            let s = sys.s(0, k).unwrap().mass().signum();
            assert!(lam.iter().all(|w| w.signum() == s), "k={k}: {lam:?}");
        }
    }

    #[test]
    fn exactness_on_the_demo() {
        let sys = demo();
        for n in [vec![2, 1], vec![3, 3], vec![1, 4]] {
            let r = build_rule(&sys, &n).unwrap();
            assert!(exactness_test(&r, &sys).unwrap() < 1e-10, "{n:?}");
        }
    }

    #[test]
    fn exp_integral_in_classical_case() {
        let sys = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        let r = build_rule(&sys, &[8]).unwrap();
        let e = std::f64::consts::E;
        assert_relative_eq!(
            integrate_simultaneously(&r, f64::exp)[0],
            e - 1.0 / e,
            epsilon = 1e-12
        );
    }

    #[test]
    fn phi_closed_form_and_normalization() {
        let h = Interval::new(-1.0, 1.0).unwrap();
        let v = phi_t(h, None, C64::new(3.0, 0.0)).unwrap();
        assert_relative_eq!(v.norm(), 1.0 / (3.0 + 2.0 * 2f64.sqrt()), epsilon = 1e-14);
        assert!(phi_t(h, Some(2.5), C64::new(2.5, 0.0)).unwrap().norm() < 1e-15);
        let near = phi_t(h, Some(2.5), C64::new(0.3, 1e-7)).unwrap().norm();
        assert!((near - 1.0).abs() < 1e-5);
        assert!(phi_t(h, None, C64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn phi_derivative_positive_at_t() {
        let h = Interval::new(-1.0, 1.0).unwrap();
        for t in [-3.0, -1.2, 1.5, 4.0] {
            let d = (phi_t(h, Some(t), C64::new(t + 1e-6, 0.0)).unwrap()
                - phi_t(h, Some(t), C64::new(t - 1e-6, 0.0)).unwrap())
                / 2e-6;
            assert!(d.re > 0.0 && d.im.abs() < 1e-6, "t={t}: {d}");
        }
    }

    #[test]
    fn classical_rate_at_three() {
        let sys = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        let rep = markov_rate(&sys, &[vec![4], vec![12]], &[C64::new(3.0, 0.0)]).unwrap();
        assert_relative_eq!(
            rep.delta_k,
            1.0 / (3.0 + 2.0 * 2f64.sqrt()),
            epsilon = 1e-14
        );
        assert!(rep.rows[1].e_n < rep.rows[0].e_n);
        assert!((rep.rows[1].root / rep.delta_k - 1.0).abs() < 0.1);
    }

    #[test]
    fn diagonal_sequence_is_balanced() {
        let s = diagonal_sequence(2, 4);
        assert_eq!(s, vec![vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phi_invariant_under_affine_reduction(
            a in -3.0f64..3.0, w in 0.2f64..4.0, tr in 0.1f64..3.0, zr in -5.0f64..5.0, zi in 0.1f64..3.0,
        ) {
            let h = Interval::new(a, a + w).unwrap();
            let unit = Interval::new(-1.0, 1.0).unwrap();
            let t = a + w + tr;
            let z = C64::new(zr, zi);
            let zu = (z - h.center()) / h.half();
            let lhs = phi_t(h, Some(t), z).unwrap();
            let rhs = phi_t(unit, Some(h.to_unit(t)), zu).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
            prop_assert!(lhs.norm() < 1.0);
        }
    }
}
