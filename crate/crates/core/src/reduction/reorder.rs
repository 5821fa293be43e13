//! Reordering a multi-index decreasingly by repeated divisions, the matching
//! polynomial map (fitted by collocation), and the orthogonality it carries
//! over to mixed forms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{lemma4_transform, linear_form, CoeffMap};
use crate::error::{Error, Result};
use crate::hermite_pade::{AtCounter, MixedForm, MultiIndex2};
use crate::measures::{Interval, Measure};
use crate::nikishin::{MixedSystem, NikishinSystem};
use crate::poly::ChebPoly;

#[derive(Clone, Debug)]
pub struct Theorem3Result {
    pub n: Vec<usize>,
    /// n_sorted[k] = n[lambda[k]]; equal entries keep their original order.
    pub lambda: Vec<usize>,
    pub n_sorted: Vec<usize>,
    /// λ(0): the form is divided by ŝ_{1,λ(0)} (nothing when 0).
    pub factor: usize,
    pub system: NikishinSystem,
    pub coeff_map: CoeffMap,
    /// Relative collocation residual of the fitted map.
    pub fit_residual: f64,
    pub divisions: usize,
}

impl Theorem3Result {
    /// |𝓛_n − (q_0 + Σ q_k r̂_{1,k})·ŝ_{1,λ(0)}| / Σ|terms of 𝓛_n| at z.
    pub fn defect(&self, tail: &NikishinSystem, p: &[Vec<f64>], z: C64) -> Result<f64> {
        let (l, scale) = linear_form(Some(tail), p, z)?;
        let q = self.coeff_map.apply(p)?;
        let (r, _) = linear_form(Some(&self.system), &q, z)?;
        let f = factor_value(tail, self.factor, z)?;
        Ok((l - r * f).norm() / scale.max(f64::MIN_POSITIVE))
    }
}

fn factor_value(tail: &NikishinSystem, factor: usize, z: C64) -> Result<C64> {
    if factor == 0 {
        Ok(C64::new(1.0, 0.0))
    } else {
        tail.s(0, factor - 1)?.cauchy_transform(z)
    }
}

/// Stable argsort by decreasing value.
pub fn reordering_permutation(n: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n.len()).collect();
    idx.sort_by(|&a, &b| n[b].cmp(&n[a]));
    idx
}

fn first_argmax(v: &[usize], from: usize) -> usize {
    let max = *v[from..].iter().max().unwrap();
    (from..v.len()).find(|&k| v[k] == max).unwrap()
}

/// Permutation λ and system S(λ) = 𝓝(ρ_1..ρ_m) with
/// p_0 + Σ p_k ŝ_{1,k} = (q_0 + Σ q_k r̂_{1,k})·ŝ_{1,λ(0)}, deg q_k < n_{λ(k)}.
///
/// If n_0 is not the maximum, divide by ŝ_{1,j} first. Then repeat: take the
/// longest prefix n_0 ≥ … ≥ n_{m̄} whose last entry bounds the remainder.
/// Divide the inner form p_{m̄+1} + Σ p_k ŝ_{m̄+2,k} and fold ŝ_{m̄+2,j} into
/// σ_{m̄+1}. Polynomial cross terms never raise the degree bounds of the
/// sorted prefix.
pub fn theorem3_reduce(tail: &NikishinSystem, n: &[usize]) -> Result<Theorem3Result> {
    let m = tail.m() + 1;
    if n.len() != m + 1 {
        return Err(Error::InvalidIndex(format!(
            "expected {} components, got {}",
            m + 1,
            n.len()
        )));
    }
    let mut gens = tail.generators().to_vec();
    let mut cur = n.to_vec();
    let mut factor = 0;
    let mut divisions = 0;
    if n[0] < *n.iter().max().unwrap() {
        factor = first_argmax(n, 1);
        let r = lemma4_transform(tail, n, factor)?;
        gens = r.system_star.generators().to_vec();
        cur = r.n_star;
        divisions += 1;
    }
    while cur.windows(2).any(|w| w[0] < w[1]) {
        let mut mbar = 0;
        while mbar < m && cur[mbar + 1] == *cur[mbar + 1..].iter().max().unwrap() {
            mbar += 1;
        }
        let sub_n = cur[mbar + 1..].to_vec();
        let sub_tail = NikishinSystem::build(gens[mbar + 1..].to_vec())?;
        let jrel = first_argmax(&sub_n, 1);
        let r = lemma4_transform(&sub_tail, &sub_n, jrel)?;
        let jabs = mbar + 1 + jrel;
        let folded = Measure::chain(&gens[mbar..jabs])?;
        let mut next = gens[..mbar].to_vec();
        next.push(folded);
        next.extend(r.system_star.generators().iter().cloned());
        gens = next;
        cur.splice(mbar + 1.., r.n_star);
        divisions += 1;
    }
    let lambda = reordering_permutation(n);
    debug_assert!(lambda.iter().map(|&i| n[i]).eq(cur.iter().copied()));
    let system = NikishinSystem::build(gens)?;
    let (coeff_map, fit_residual) = fit_coeff_map(tail, n, factor, &system, &cur)?;
    Ok(Theorem3Result {
        n: n.to_vec(),
        lambda,
        n_sorted: cur,
        factor,
        system,
        coeff_map,
        fit_residual,
        divisions,
    })
}

const FIT_RADII: [f64; 2] = [1.6, 3.0];
const FIT_POINTS: usize = 64;

/// Least-squares map p ↦ q with 𝓛_n(z)/ŝ_{1,factor}(z) = q_0 + Σ q_k r̂_{1,k}(z),
/// collocated on two Bernstein ellipses around Δ_1. Unknowns use a Chebyshev
/// basis on Δ_1 and are converted to monomials. Returns the map and the
/// largest relative collocation residual.
pub fn fit_coeff_map(
    tail: &NikishinSystem,
    n: &[usize],
    factor: usize,
    system: &NikishinSystem,
    n_out: &[usize],
) -> Result<(CoeffMap, f64)> {
    let frame = tail.hull(0);
    let (c, h) = (frame.center(), frame.half());
    let mut zs = vec![];
    for &r in &FIT_RADII {
        for q in 0..FIT_POINTS {
            let u = C64::from_polar(r, 2.0 * PI * (q as f64 + 0.5) / FIT_POINTS as f64);
            zs.push((u + 1.0 / u) * (0.5 * h) + c);
        }
    }
    let (cols_in, cols_out): (usize, usize) = (n.iter().sum(), n_out.iter().sum());
    let rows = 2 * zs.len();
    let mut a = DMatrix::zeros(rows, cols_out);
    let mut b = DMatrix::zeros(rows, cols_in);
    for (i, &z) in zs.iter().enumerate() {
        let f = factor_value(tail, factor, z)?;
        let t = (z - c) / h;
        let mut col = 0;
        for (k, &nk) in n_out.iter().enumerate() {
            let g = if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                system.s(0, k - 1)?.cauchy_transform(z)?
            };
            let mut tv = vec![C64::new(1.0, 0.0), t];
            while tv.len() < nk {
                let l = tv.len();
                tv.push(t * tv[l - 1] * 2.0 - tv[l - 2]);
            }
            for &td in tv.iter().take(nk) {
                let v = td * g;
                a[(2 * i, col)] = v.re;
                a[(2 * i + 1, col)] = v.im;
                col += 1;
            }
        }
        let mut col = 0;
        for (k, &nk) in n.iter().enumerate() {
            let g = if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                tail.s(0, k - 1)?.cauchy_transform(z)?
            } / f;
            let mut zp = C64::new(1.0, 0.0);
            for _ in 0..nk {
                let v = zp * g;
                b[(2 * i, col)] = v.re;
                b[(2 * i + 1, col)] = v.im;
                zp *= z;
                col += 1;
            }
        }
    }
    let mut map = CoeffMap::zeros(n, n_out);
    if cols_in == 0 || cols_out == 0 {
        return Ok((map, 0.0));
    }
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::DerivateConstructionFailed(e.into()))?;
    let resid = &a * &x - &b;
    let mut worst = 0.0f64;
    for j in 0..cols_in {
        let bn = b.column(j).norm();
        if bn > 0.0 {
            worst = worst.max(resid.column(j).norm() / bn);
        }
    }
    // Chebyshev → monomial, block by block.
    let mut conv = DMatrix::zeros(cols_out, cols_out);
    let mut off = 0;
    for &nk in n_out {
        for d in 0..nk {
            let mut e = vec![0.0; d + 1];
            e[d] = 1.0;
            for (i, v) in ChebPoly::new(frame, e)
                .to_monomial()
                .into_iter()
                .enumerate()
            {
                conv[(off + i, off + d)] = v;
            }
        }
        off += nk;
    }
    map.matrix = conv * x;
    Ok((map, worst))
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem4Report {
    pub lambda: Vec<usize>,
    pub counts: Vec<usize>,
    pub residuals: Vec<f64>,
    pub scale: f64,
}

/// Orthogonality of a solved mixed form against r_{0,k} = ⟨ρ_0, ρ_1, …, ρ_k⟩
/// with ρ_0 = ŝ²_{1,λ₂(0)}σ_0 and (ρ_1..ρ_{m_2}) from reordering n_2: the
/// integrals ∫ x^ν 𝓐_n dr_{0,k} vanish for ν < n_{2,λ₂(k)}.
pub fn theorem4_check(
    mix: &MixedSystem,
    n: &MultiIndex2,
    form: &MixedForm,
) -> Result<Theorem4Report> {
    use crate::hermite_pade::residuals_against;
    let Some(tail) = mix.s2.tail() else {
        let (residuals, scale) = form.orthogonality_residuals()?;
        return Ok(Theorem4Report {
            lambda: vec![0],
            counts: n.n2.clone(),
            residuals,
            scale,
        });
    };
    let t3 = theorem3_reduce(&tail, &n.n2)?;
    let lead = if t3.factor == 0 {
        None
    } else {
        Some(tail.s(0, t3.factor - 1)?)
    };
    let chains: Vec<Measure> = (1..=t3.system.m() + 1)
        .map(|k| t3.system.s(0, k - 1))
        .collect::<Result<_>>()?;
    let weight = |k: usize, x: f64| -> Result<f64> {
        let mut g = match &lead {
            Some(s) => s.transform_real(x)?,
            None => 1.0,
        };
        if k > 0 {
            g *= chains[k - 1].transform_real(x)?;
        }
        Ok(g)
    };
    let (residuals, scale) =
        residuals_against(form, &t3.n_sorted, weight, |_x, t, nu| t.powi(nu as i32))?;
    Ok(Theorem4Report {
        lambda: t3.lambda,
        counts: t3.n_sorted,
        residuals,
        scale,
    })
}

/// For n_0 ≥ n_k − 1 (all k), counts the zeros of p_0 + Σ p_k ŝ_{1,k} in
/// ℂ∖Δ_1 and reports whether the count stays below |n|.
pub fn lemma3_reduced_zero_check(
    tail: Option<&NikishinSystem>,
    n: &[usize],
    p: &[Vec<f64>],
) -> Result<bool> {
    if n[1..].iter().any(|&v| v > n[0] + 1) {
        return Err(Error::PreconditionViolated(format!(
            "n_0 must dominate n_k − 1 in {n:?}"
        )));
    }
    let probe = match tail {
        Some(t) => {
            let d = t.hull(0);
            Interval::new(d.b + 0.5, d.b + 0.5 + 2.0 * d.len())?
        }
        None => Interval::new(-1.0, 1.0)?,
    };
    let total: usize = n.iter().sum();
    if tail.is_none() {
        let deg = p[0].iter().rposition(|&c| c != 0.0).unwrap_or(0);
        return Ok(deg < total.max(1));
    }
    let counter = AtCounter::new(tail, probe)?;
    let (zeros, real) = counter.count_zeros(p)?;
    Ok(zeros.max(real) < total.max(1))
}
