//! Division of a linear form p_0 + Σ p_k ŝ_{1,k} by ŝ_{1,j}, where n_j is
//! the strict maximum over n_0 and a weak maximum over the rest.
//!
//! The new multi-index and system are assembled step by step. Step k
//! compares the smallest entry so far, n_l with l the index not yet placed,
//! against n_k. Branch A (n_l ≥ n_k, ties included) places n_l; branch B
//! places n_k. A pending measure on Δ_k carries the unplaced coefficient.

use serde::Serialize;

use super::{derivate, linear_form, Chains, CoeffMap};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::nikishin::NikishinSystem;
use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    A,
    B,
}

#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub n: Vec<usize>,
    pub j: usize,
    pub n_star: Vec<usize>,
    /// n_star[k] = n[permutation[k]].
    pub permutation: Vec<usize>,
    pub branches: Vec<Branch>,
    pub system_star: NikishinSystem,
    pub coeff_map: CoeffMap,
}

impl ReductionResult {
    /// Relative defect |𝓛_n − 𝓛*_{n*}·ŝ_{1,j}| / Σ|terms of 𝓛_n| at z.
    pub fn defect(&self, tail: &NikishinSystem, p: &[Vec<f64>], z: C64) -> Result<f64> {
        let (l, scale) = linear_form(Some(tail), p, z)?;
        let q = self.coeff_map.apply(p)?;
        let (r, _) = linear_form(Some(&self.system_star), &q, z)?;
        let f = tail.s(0, self.j - 1)?.cauchy_transform(z)?;
        Ok((l - r * f).norm() / scale.max(f64::MIN_POSITIVE))
    }
}

fn sgn(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check(tail: &NikishinSystem, n: &[usize], j: usize) -> Result<()> {
    let m = tail.m() + 1;
    if n.len() != m + 1 {
        return Err(Error::InvalidIndex(format!(
            "expected {} components, got {}",
            m + 1,
            n.len()
        )));
    }
    if j == 0 || j > m {
        return Err(Error::PreconditionViolated(format!(
            "j = {j} outside 1..={m}"
        )));
    }
    if n[j] <= n[0] || n[1..].iter().any(|&v| v > n[j]) {
        return Err(Error::PreconditionViolated(format!(
            "n_{j} = {} is not max{{n_0 + 1, n_1, …, n_m}} for n = {n:?}",
            n[j]
        )));
    }
    Ok(())
}

/// Branch sequence and index bookkeeping (no measures).
struct Plan {
    branches: Vec<Branch>,
    /// l before each step, then the final l.
    ls: Vec<usize>,
    n_star: Vec<usize>,
    perm: Vec<usize>,
}

fn plan(n: &[usize], j: usize) -> Plan {
    let m = n.len() - 1;
    let (mut l, mut branches, mut ls) = (0, vec![], vec![]);
    let (mut n_star, mut perm) = (vec![n[j]], vec![j]);
    for k in 1..j {
        ls.push(l);
        if n[l] >= n[k] {
            branches.push(Branch::A);
            n_star.push(n[l]);
            perm.push(l);
            l = k;
        } else {
            branches.push(Branch::B);
            n_star.push(n[k]);
            perm.push(k);
        }
    }
    ls.push(l);
    n_star.push(n[l]);
    perm.push(l);
    for k in j + 1..=m {
        n_star.push(n[k]);
        perm.push(k);
    }
    Plan {
        branches,
        ls,
        n_star,
        perm,
    }
}

/// The explicit coefficient map:
/// p*_0 = ℓ_{1,j}p_0 + p_j + Σ_{i≠j}(|s_{1,i}|/|s_{1,j}|)p_i; each step
/// combines p_l and p_k with mass ratios; p*_j takes the last unplaced
/// polynomial, and p*_k = (−1)^j p_k beyond j.
fn coeff_map(tail: &NikishinSystem, n: &[usize], j: usize, pl: &Plan) -> Result<CoeffMap> {
    let c = Chains(tail);
    let m = n.len() - 1;
    let mut map = CoeffMap::zeros(n, &pl.n_star);
    let s1j = c.s(1, j)?.mass();
    let ell = c.s(1, j)?.ell()?;
    map.add(0, 0, ell.b, 0);
    map.add(0, 0, ell.a, 1);
    for i in 1..=m {
        let w = if i == j { 1.0 } else { c.s(1, i)?.mass() / s1j };
        map.add(0, i, w, 0);
    }
    for (step, (&br, &l)) in pl.branches.iter().zip(&pl.ls).enumerate() {
        let k = step + 1;
        let sj = c.s(k + 1, j)?.mass();
        let g = Measure::product(&c.s(k + 1, j)?, &c.s(k, l + 1)?)?.mass();
        match br {
            Branch::A => {
                map.add(k, l, sgn(l), 0);
                map.add(k, k, sgn(step) * g / sj, 0);
            }
            Branch::B => {
                map.add(k, k, sgn(step), 0);
                map.add(k, l, sgn(l) * sj / g, 0);
            }
        }
    }
    let last = *pl.ls.last().unwrap();
    map.add(j, last, sgn(last), 0);
    for k in j + 1..=m {
        map.add(k, k, sgn(j), 0);
    }
    Ok(map)
}

/// Generators σ*_{j+1}, …, σ*_m that follow the pending one.
fn tail_after(c: &Chains, m: usize, j: usize, last_l: usize) -> Result<Vec<Measure>> {
    let mut v = vec![];
    if j < m {
        v.push(c.s(j + 1, last_l + 1)?);
        for k in j + 2..=m {
            v.push(c.sig(k));
        }
    }
    Ok(v)
}

/// σ*_1..σ*_m from the inductive construction, valid for every j.
pub fn lemma4_recurrence(tail: &NikishinSystem, n: &[usize], j: usize) -> Result<ReductionResult> {
    check(tail, n, j)?;
    let c = Chains(tail);
    let m = n.len() - 1;
    let pl = plan(n, j);
    let mut pending = c.tau(1, j)?;
    let mut gens = vec![];
    for (step, (&br, &l)) in pl.branches.iter().zip(&pl.ls).enumerate() {
        let k = step + 1;
        let skj = c.s(k + 1, j)?;
        let h = c.s(k, l + 1)?;
        match br {
            Branch::A => {
                gens.push(pending);
                pending = Measure::product(&c.tau(k + 1, j)?, &Measure::product(&h, &skj)?)?;
            }
            Branch::B => {
                let g = Measure::product(&skj, &h)?;
                gens.push(derivate(&pending, &[&g], &[&skj])?);
                let inv = Measure::inverse(&Measure::product(&skj, &h)?)?;
                pending = derivate(&inv, &[&Measure::product(&h, &skj)?], &[&h])?;
            }
        }
    }
    gens.push(pending);
    gens.extend(tail_after(&c, m, j, *pl.ls.last().unwrap())?);
    finish(tail, n, j, pl, gens)
}

fn finish(
    tail: &NikishinSystem,
    n: &[usize],
    j: usize,
    pl: Plan,
    gens: Vec<Measure>,
) -> Result<ReductionResult> {
    let coeff_map = coeff_map(tail, n, j, &pl)?;
    Ok(ReductionResult {
        n: n.to_vec(),
        j,
        n_star: pl.n_star,
        permutation: pl.perm,
        branches: pl.branches,
        system_star: NikishinSystem::build(gens)?,
        coeff_map,
    })
}

/// σ*_1..σ*_m written out case by case for j ≤ 4.
pub fn lemma4_table(tail: &NikishinSystem, n: &[usize], j: usize) -> Result<ReductionResult> {
    use Branch::*;
    check(tail, n, j)?;
    if j > 4 {
        return Err(Error::PreconditionViolated(format!(
            "explicit tables stop at j = 4, got {j}"
        )));
    }
    let c = Chains(tail);
    let m = n.len() - 1;
    let pl = plan(n, j);
    let s = |a, b| c.s(a, b);
    let sig = |a| c.sig(a);
    let tau = |a, b| c.tau(a, b);
    let prod = |a: &Measure, b: &Measure| Measure::product(a, b);
    let head: Vec<Measure> = match (j, pl.branches.as_slice()) {
        (1, []) => vec![tau(1, 1)?],
        (2, [A]) => vec![tau(1, 2)?, prod(&tau(2, 2)?, &s(1, 2)?)?],
        (2, [B]) => vec![
            derivate(&tau(1, 2)?, &[&s(2, 1)?], &[&s(2, 2)?])?,
            derivate(&c.tau2(2, 2, 1, 1)?, &[&s(1, 2)?], &[&s(1, 1)?])?,
        ],
        (3, [A, A]) => vec![
            tau(1, 3)?,
            prod(&tau(2, 3)?, &s(1, 3)?)?,
            prod(&tau(3, 3)?, &s(2, 3)?)?,
        ],
        (3, [B, A]) => vec![
            derivate(&tau(1, 3)?, &[&prod(&s(2, 3)?, &sig(1))?], &[&s(2, 3)?])?,
            derivate(&c.tau2(2, 3, 1, 1)?, &[&s(1, 3)?], &[&s(1, 1)?])?,
            Measure::chain(&[tau(3, 3)?, s(2, 3)?, sig(1)])?,
        ],
        (3, [A, B]) => vec![
            tau(1, 3)?,
            derivate(&prod(&tau(2, 3)?, &s(1, 3)?)?, &[&s(3, 2)?], &[&s(3, 3)?])?,
            derivate(&c.tau2(3, 3, 2, 2)?, &[&s(2, 3)?], &[&s(2, 2)?])?,
        ],
        (3, [B, B]) => vec![
            derivate(&tau(1, 3)?, &[&prod(&s(2, 3)?, &sig(1))?], &[&s(2, 3)?])?,
            derivate(
                &c.tau2(2, 3, 1, 1)?,
                &[&s(3, 1)?, &s(1, 3)?],
                &[&s(3, 3)?, &s(1, 1)?],
            )?,
            derivate(
                &c.tau2(3, 3, 2, 1)?,
                &[&prod(&s(2, 1)?, &s(3, 3)?)?],
                &[&s(2, 1)?],
            )?,
        ],
        (4, [A, A, A]) => vec![
            tau(1, 4)?,
            prod(&tau(2, 4)?, &s(1, 4)?)?,
            prod(&tau(3, 4)?, &s(2, 4)?)?,
            prod(&tau(4, 4)?, &s(3, 4)?)?,
        ],
        (4, [B, A, A]) => vec![
            derivate(&tau(1, 4)?, &[&prod(&s(2, 4)?, &sig(1))?], &[&s(2, 4)?])?,
            derivate(&c.tau2(2, 4, 1, 1)?, &[&s(1, 4)?], &[&sig(1)])?,
            Measure::chain(&[tau(3, 4)?, s(2, 4)?, sig(1)])?,
            prod(&tau(4, 4)?, &s(3, 4)?)?,
        ],
        (4, [A, B, A]) => vec![
            tau(1, 4)?,
            derivate(
                &tau(2, 4)?,
                &[&prod(&s(3, 4)?, &sig(2))?, &s(1, 4)?],
                &[&s(3, 4)?],
            )?,
            derivate(&c.tau2(3, 4, 2, 2)?, &[&s(2, 4)?], &[&sig(2)])?,
            Measure::chain(&[tau(4, 4)?, s(3, 2)?, sig(4)])?,
        ],
        (4, [B, B, A]) => vec![
            derivate(&tau(1, 4)?, &[&prod(&s(2, 4)?, &sig(1))?], &[&s(2, 4)?])?,
            derivate(
                &c.tau2(2, 4, 1, 1)?,
                &[&prod(&s(3, 4)?, &s(2, 1)?)?, &s(1, 4)?],
                &[&s(3, 4)?, &sig(1)],
            )?,
            derivate(
                &c.tau2(3, 4, 2, 1)?,
                &[&prod(&s(2, 1)?, &s(3, 4)?)?],
                &[&s(2, 1)?],
            )?,
            Measure::chain(&[tau(4, 4)?, s(3, 1)?, sig(4)])?,
        ],
        (4, [A, A, B]) => vec![
            tau(1, 4)?,
            prod(&tau(2, 4)?, &s(1, 4)?)?,
            derivate(&tau(3, 4)?, &[&s(4, 3)?, &s(2, 4)?], &[&sig(4)])?,
            derivate(&c.tau2(4, 4, 3, 3)?, &[&s(3, 4)?], &[&sig(3)])?,
        ],
        (4, [B, A, B]) => vec![
            derivate(&tau(1, 4)?, &[&prod(&s(2, 4)?, &sig(1))?], &[&s(2, 4)?])?,
            derivate(&c.tau2(2, 4, 1, 1)?, &[&s(1, 4)?], &[&sig(1)])?,
            derivate(
                &Measure::chain(&[tau(3, 4)?, s(2, 4)?, sig(1)])?,
                &[&s(4, 3)?],
                &[&sig(4)],
            )?,
            derivate(&c.tau2(4, 4, 3, 3)?, &[&s(3, 4)?], &[&sig(3)])?,
        ],
        (4, [A, B, B]) => vec![
            tau(1, 4)?,
            derivate(
                &tau(2, 4)?,
                &[&prod(&s(3, 4)?, &sig(2))?, &s(1, 4)?],
                &[&s(3, 4)?],
            )?,
            derivate(
                &c.tau2(3, 4, 2, 2)?,
                &[&s(4, 2)?, &s(2, 4)?],
                &[&sig(4), &sig(2)],
            )?,
            derivate(
                &c.tau2(4, 4, 3, 2)?,
                &[&prod(&s(3, 2)?, &sig(4))?],
                &[&s(3, 2)?],
            )?,
        ],
        (4, [B, B, B]) => vec![
            derivate(&tau(1, 4)?, &[&prod(&s(2, 4)?, &sig(1))?], &[&s(2, 4)?])?,
            derivate(
                &c.tau2(2, 4, 1, 1)?,
                &[&prod(&s(3, 4)?, &s(2, 1)?)?, &s(1, 4)?],
                &[&s(3, 4)?, &sig(1)],
            )?,
            derivate(
                &c.tau2(3, 4, 2, 1)?,
                &[&s(4, 1)?, &prod(&s(2, 1)?, &s(3, 4)?)?],
                &[&sig(4), &s(2, 1)?],
            )?,
            derivate(
                &c.tau2(4, 4, 3, 1)?,
                &[&prod(&s(3, 1)?, &sig(4))?],
                &[&s(3, 1)?],
            )?,
        ],
        _ => unreachable!("branch sequence length is j − 1"),
    };
    let mut gens = head;
    gens.extend(tail_after(&c, m, j, *pl.ls.last().unwrap())?);
    finish(tail, n, j, pl, gens)
}

/// Tables for j ≤ 4, the recurrence beyond.
pub fn lemma4_transform(tail: &NikishinSystem, n: &[usize], j: usize) -> Result<ReductionResult> {
    if j <= 4 {
        lemma4_table(tail, n, j)
    } else {
        lemma4_recurrence(tail, n, j)
    }
}
