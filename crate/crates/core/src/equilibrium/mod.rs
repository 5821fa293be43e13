//! Vector equilibrium problems for the logarithmic potential: the tridiagonal
//! interaction matrix built from ray proportions, a discretized energy
//! minimizer, the n-th root limit G and ratio experiments along index rays.

mod asymptotics;
mod solver;

#[cfg(test)]
mod tests;

pub use asymptotics::{
    g_function, lcm_step, nth_root_compare, ratio_experiment, ray_equilibrium, IndexRay,
    NthRootRow, NthRootTable, RatioReport, RatioRow,
};
pub use solver::{
    solve_vector_equilibrium, DiscretizedMeasure, EquilibriumOptions, EquilibriumSolution, Field,
    Grading,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermite_pade::MultiIndex2;
use crate::measures::Interval;
use crate::nikishin::MixedSystem;

/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// Interaction matrix over the components j = −m_2, …, m_1.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionMatrix {
    pub m1: usize,
    pub m2: usize,
    /// P_j at position j + m_2.
    pub p: Vec<f64>,
    pub entries: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

impl InteractionMatrix {
    pub fn dim(&self) -> usize {
        self.m1 + self.m2 + 1
    }

    pub fn components(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m2 as i64)..=self.m1 as i64
    }

    pub fn pos(&self, j: i64) -> usize {
        (j + self.m2 as i64) as usize
    }

    pub fn big_p(&self, j: i64) -> f64 {
        self.p[self.pos(j)]
    }

    pub fn c(&self, j: i64, k: i64) -> f64 {
        self.entries[(self.pos(j), self.pos(k))]
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
    }
}

fn check_probability(p: &[f64], side: &str) -> Result<()> {
    let bad = |msg: String| Err(Error::BadProbabilityVector(format!("{side}: {msg}")));
    if p.is_empty() {
        return bad("empty".into());
    }
    if p.len() > 1 {
        if let Some(v) = p
            .iter()
            .find(|v| !(v.is_finite() && **v > 0.0 && **v < 1.0))
        {
            return bad(format!("entry {v} outside (0, 1)"));
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return bad(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// Decreasing reordering λ; ties keep their original order.
pub fn decreasing_order(p: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap().then(a.cmp(&b)));
    idx
}

fn tails(p: &[f64]) -> Vec<f64> {
    let ordered: Vec<f64> = decreasing_order(p).into_iter().map(|i| p[i]).collect();
    (0..p.len()).map(|j| ordered[j..].iter().sum()).collect()
}

pub fn build_interaction(p1: &[f64], p2: &[f64]) -> Result<InteractionMatrix> {
    check_probability(p1, "p1")?;
    check_probability(p2, "p2")?;
    let (m1, m2) = (p1.len() - 1, p2.len() - 1);
    let (t1, t2) = (tails(p1), tails(p2));
    // Position j + m_2: P_{−m_2}, …, P_{−1}, P_0, P_1, …, P_{m_1}.
    let mut p: Vec<f64> = t2[1..].iter().rev().copied().collect();
    p.push(1.0);
    p.extend_from_slice(&t1[1..]);
    let d = p.len();
    let mut c = DMatrix::zeros(d, d);
    for i in 0..d {
        c[(i, i)] = p[i] * p[i];
        if i + 1 < d {
            let v = -p[i] * p[i + 1] / 2.0;
            c[(i, i + 1)] = v;
            c[(i + 1, i)] = v;
        }
    }
    let min_eigenvalue = c.clone().symmetric_eigen().eigenvalues.min();
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::IndefiniteInteraction(min_eigenvalue));
    }
    Ok(InteractionMatrix {
        m1,
        m2,
        p,
        entries: c,
        min_eigenvalue,
    })
}

/// Proportions n_{i,j}/|n_i| of an index (typically a ray step).
pub fn proportions(n: &MultiIndex2) -> Result<(Vec<f64>, Vec<f64>)> {
    let frac = |v: &[usize]| -> Result<Vec<f64>> {
        let t: usize = v.iter().sum();
        if t == 0 {
            return Err(Error::BadProbabilityVector("zero step".into()));
        }
        Ok(v.iter().map(|&x| x as f64 / t as f64).collect())
    };
    Ok((frac(&n.n1)?, frac(&n.n2)?))
}

/// Compact sets E_j, j = −m_2, …, m_1: hulls of the generators of S² (negative
/// side), the shared base (j = 0) and S¹ (positive side).
pub fn supports(mix: &MixedSystem) -> Vec<Vec<Interval>> {
    let mut out: Vec<Vec<Interval>> = (1..=mix.m2()).rev().map(|j| vec![mix.s2.hull(j)]).collect();
    out.push(vec![mix.base().hull()]);
    out.extend((1..=mix.m1()).map(|j| vec![mix.s1.hull(j)]));
    out
}
