//! Measure-reduction algebra: Cauchy-transform identities, the transform that
//! divides a linear form by ŝ_{1,j}, the reordering to decreasing multi-indices
//! and the transferred orthogonality of mixed forms.

mod identities;
mod lemma4;
mod reorder;

#[cfg(test)]
mod tests;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub use identities::{
    filter_probes, identity_table, standard_probes, verify_identity, Bindings, IdentityCase,
    IdentityId, IdentityRow,
};
pub use lemma4::{lemma4_recurrence, lemma4_table, lemma4_transform, Branch, ReductionResult};
pub use reorder::{
    fit_coeff_map, lemma3_reduced_zero_check, reordering_permutation, theorem3_reduce,
    theorem4_check, Theorem3Result, Theorem4Report,
};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::nikishin::NikishinSystem;
use crate::poly::horner;

/// Linear map from stacked monomial coefficients (p_0, …, p_m), deg p_k < n_k,
/// to stacked (p*_0, …, p*_m), deg p*_k < n*_k. Block sizes are the degree
/// bounds, so the output degrees hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMap {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut o = vec![0];
    for s in sizes {
        o.push(o.last().unwrap() + s);
    }
    o
}

impl CoeffMap {
    pub(crate) fn zeros(input: &[usize], output: &[usize]) -> Self {
        let (r, c) = (output.iter().sum(), input.iter().sum());
        CoeffMap {
            input: input.to_vec(),
            output: output.to_vec(),
            matrix: DMatrix::zeros(r, c),
        }
    }

    /// Adds `c`·z^shift·p_src into p*_dst.
    pub(crate) fn add(&mut self, dst: usize, src: usize, c: f64, shift: usize) {
        let (oi, oo) = (offsets(&self.input), offsets(&self.output));
        for d in 0..self.input[src] {
            let e = d + shift;
            assert!(
                e < self.output[dst],
                "coefficient map would raise a degree bound"
            );
            self.matrix[(oo[dst] + e, oi[src] + d)] += c;
        }
    }

    pub fn apply(&self, p: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if p.len() != self.input.len() {
            return Err(Error::InvalidIndex(format!(
                "expected {} polynomials",
                self.input.len()
            )));
        }
        let oi = offsets(&self.input);
        let mut x = nalgebra::DVector::zeros(oi[self.input.len()]);
        for (k, pk) in p.iter().enumerate() {
            if pk.len() > self.input[k] {
                return Err(Error::InvalidIndex(format!(
                    "p_{k} exceeds its degree bound"
                )));
            }
            for (d, &c) in pk.iter().enumerate() {
                x[oi[k] + d] = c;
            }
        }
        let y = &self.matrix * x;
        let oo = offsets(&self.output);
        Ok((0..self.output.len())
            .map(|k| y.as_slice()[oo[k]..oo[k + 1]].to_vec())
            .collect())
    }
}

/// Value of p_0 + Σ_k p_k ŝ_{1,k} at z for the tail system σ_1..σ_m
/// (`None` for m = 0), together with Σ|terms| as a scale.
pub fn linear_form(tail: Option<&NikishinSystem>, p: &[Vec<f64>], z: C64) -> Result<(C64, f64)> {
    let mut acc = horner(&p[0], z);
    let mut scale = acc.norm();
    for k in 1..p.len() {
        let t = tail.ok_or_else(|| {
            Error::InvalidIndex("form has more components than the system".into())
        })?;
        let term = horner(&p[k], z) * t.s(0, k - 1)?.cauchy_transform(z)?;
        acc += term;
        scale += term.norm();
    }
    Ok((acc, scale))
}

/// 1-based access to the chains of a tail σ_1..σ_m: `s(a, b)` runs from σ_a
/// to σ_b in either direction, `tau(a, b)` is its inverse measure.
pub(crate) struct Chains<'a>(pub &'a NikishinSystem);

impl Chains<'_> {
    pub fn s(&self, a: usize, b: usize) -> Result<Measure> {
        self.0.s(a - 1, b - 1)
    }
    pub fn sig(&self, a: usize) -> Measure {
        self.0.sigma(a - 1).clone()
    }
    pub fn tau(&self, a: usize, b: usize) -> Result<Measure> {
        Measure::inverse(&self.s(a, b)?)
    }
    /// Inverse of ⟨s_{a,b}, s_{c,d}⟩.
    pub fn tau2(&self, a: usize, b: usize, c: usize, d: usize) -> Result<Measure> {
        Measure::inverse(&Measure::product(&self.s(a, b)?, &self.s(c, d)?)?)
    }
    /// ⟨τ_{i,j}, s_{i−1,j}⟩.
    pub fn link(&self, i: usize, j: usize) -> Result<Measure> {
        Measure::product(&self.tau(i, j)?, &self.s(i - 1, j)?)
    }
}

/// base·Πŝ_num/Πŝ_den.
pub(crate) fn derivate(base: &Measure, num: &[&Measure], den: &[&Measure]) -> Result<Measure> {
    use crate::measures::CauchyFactor;
    let mut f: Vec<CauchyFactor> = num.iter().map(|m| CauchyFactor::num(m)).collect();
    f.extend(den.iter().map(|m| CauchyFactor::den(m)));
    Measure::weighted_derivate(base, &f).map_err(|e| match e {
        Error::IndefiniteHankel { .. } | Error::SignChangeDetected { .. } => {
            Error::DerivateConstructionFailed(e.to_string())
        }
        e => e,
    })
}
