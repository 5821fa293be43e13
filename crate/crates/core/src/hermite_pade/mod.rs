//! Mixed-type Hermite–Padé forms A_n = a_0 + Σ a_k ŝ¹_{1,k}.
//!
//! Unknown polynomials are expanded in Chebyshev polynomials of the base
//! hull. The orthogonality conditions ∫ x^ν ŝ²_{1,j} A_n dσ_0 = 0 are posed
//! between two orthonormalized function spaces (trial: T_i ŝ¹_{1,k}; test:
//! T_ν ŝ²_{1,j}, both sampled on a Gauss rule of σ_0), which keeps the
//! nullspace computation well conditioned far past the monomial wall.

mod at;
pub mod hp;
mod solver;
mod type2;
mod zeros;

pub use at::{AtCounter, AtReport};
pub(crate) use solver::residuals_against;
pub use solver::{
    brute_force_coefficients, normality_scan, solve_mixed, solve_mixed_with, Precision, ScanRow,
    SolveOptions,
};
pub use type2::{type2_pade, Type2Approximant};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::nikishin::MixedSystem;
use crate::poly::{cheb_values, ChebPoly};

/// (n_1; n_2) with |n_1| = |n_2| + 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndex2 {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

impl MultiIndex2 {
    pub fn new(n1: Vec<usize>, n2: Vec<usize>) -> Self {
        MultiIndex2 { n1, n2 }
    }

    pub fn total1(&self) -> usize {
        self.n1.iter().sum()
    }

    pub fn total2(&self) -> usize {
        self.n2.iter().sum()
    }

    pub fn validate(&self, mix: &MixedSystem) -> Result<()> {
        if self.n1.len() != mix.m1() + 1 || self.n2.len() != mix.m2() + 1 {
            return Err(Error::InvalidIndex(format!(
                "expected {} + {} components, got {} + {}",
                mix.m1() + 1,
                mix.m2() + 1,
                self.n1.len(),
                self.n2.len()
            )));
        }
        if self.total1() != self.total2() + 1 {
            return Err(Error::InvalidIndex(format!(
                "need |n1| = |n2| + 1, got {} and {}",
                self.total1(),
                self.total2()
            )));
        }
        Ok(())
    }

    /// Component j chosen for monic normalization: the last index attaining min n_1.
    pub fn monic_component(&self) -> usize {
        let min = *self.n1.iter().min().expect("non-empty index");
        self.n1.iter().rposition(|&v| v == min).unwrap()
    }
}

impl std::fmt::Display for MultiIndex2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let j = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "({};{})", j(&self.n1), j(&self.n2))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalityReport {
    /// Degree of each a_{n,k}; −1 for an absent component.
    pub achieved_degrees: Vec<i64>,
    pub nullity: usize,
    /// min(σ_min/σ_max of the reduced system, degree margins).
    pub singular_gap: f64,
    pub normal: bool,
    /// Relative orthogonality residual max|M a| / (‖a‖·‖M‖_F) in the monomial test basis.
    pub residual: f64,
    /// min_k |lead(a_k)| / ‖a‖ in the monomial basis of the hull variable (diagnostic only).
    pub lead_ratio: f64,
}

/// A solved form together with the system it pairs with.
#[derive(Clone, Debug)]
pub struct MixedForm {
    pub coeffs: Vec<ChebPoly>,
    pub mix: MixedSystem,
    pub index: MultiIndex2,
    pub report: NormalityReport,
    /// Working-precision copy of the coefficients (extended-precision solves).
    pub hp: Option<std::sync::Arc<hp::HpForm>>,
}

impl MixedForm {
    /// A_n(x) for real x on the base hull.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if let Some(h) = self.hp_eval() {
            return Ok(h.eval_real(x));
        }
        let v = self.mix.s1.markov_vector_real(x)?;
        Ok(self.coeffs.iter().zip(&v).map(|(p, f)| p.eval(x) * f).sum())
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        if let Some(h) = self.hp_eval() {
            self.mix.s1.markov_vector(z)?;
            return Ok(h.eval(z));
        }
        let v = self.mix.s1.markov_vector(z)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&v)
            .map(|(p, f)| p.eval_c(z) * f)
            .sum())
    }

    /// Forms with m_1 ≥ 1 cancel heavily near the base and are evaluated at
    /// working precision when available; polynomials are safe in double.
    fn hp_eval(&self) -> Option<&hp::HpForm> {
        self.hp.as_deref().filter(|_| self.mix.m1() >= 1)
    }

    /// A_n'(x) on the base hull.
    pub fn deriv_real(&self, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (k, p) in self.coeffs.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            if k == 0 {
                acc += p.derivative().eval(x);
            } else {
                let s = self.mix.s1.s(1, k)?;
                let f = s.transform_real(x)?;
                let df = s.cauchy_transform_deriv(C64::new(x, 0.0))?.re;
                acc += p.derivative().eval(x) * f + p.eval(x) * df;
            }
        }
        Ok(acc)
    }

    /// Scales so that the leading coefficient of a_{n,j} is 1, with j the
    /// last component attaining min n_1.
    pub fn monic_normalize(&self) -> Result<MixedForm> {
        if !self.report.normal {
            return Err(Error::NotNormal);
        }
        let j = self.index.monic_component();
        if self.index.n1[j] == 0 {
            return Err(Error::PreconditionViolated(
                "monic normalization needs min n1 ≥ 1".into(),
            ));
        }
        let lead = self.coeffs[j].leading_x();
        let norm: f64 = self
            .coeffs
            .iter()
            .flat_map(|p| p.coef.iter())
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        if lead == 0.0 || !lead.is_finite() || lead.abs() < 1e-300 * norm.max(1.0) {
            return Err(Error::ZeroLeadingCoefficient { component: j });
        }
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|p| p.scaled(1.0 / lead)).collect();
        out.hp = self
            .hp
            .as_ref()
            .map(|h| std::sync::Arc::new(h.scaled(1.0 / lead)));
        Ok(out)
    }

    /// R_{n,j}(z) = ∫ ŝ²_{1,j}(x) A_n(x) dσ_0(x)/(z − x).
    ///
    /// Orthogonality lets any ω of degree ≤ n_{2,j} be slipped in:
    /// R = (1/ω(z)) ∫ ω(x) ŝ²_{1,j} A_n dσ_0/(z − x). With ω = T_{n_{2,j}} on
    /// the hull no cancellation occurs, so the tiny remainder keeps full
    /// relative accuracy far from the support.
    pub fn remainder(&self, j: usize, z: C64) -> Result<C64> {
        let base = self.mix.base();
        let frame = base.hull();
        let nj = self.index.n2[j];
        let nodes = base.nodes_for(z).max(2 * self.index.total1() + 64);
        let rule = base.rule(nodes)?;
        let weight = if j == 0 {
            None
        } else {
            Some(self.mix.s2.s(1, j)?)
        };
        let mut num = C64::new(0.0, 0.0);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let g = match &weight {
                Some(s) => s.transform_real(x)?,
                None => 1.0,
            };
            let om = *cheb_values(nj + 1, frame.to_unit(x)).last().unwrap();
            num += w * om * g * self.eval_real(x)? / (z - x);
        }
        let tz = (z - frame.center()) / frame.half();
        let om_z = omega_c(nj, tz);
        Ok(num / om_z)
    }

    /// Zeros of A_n inside the open base hull; see [`zeros::zeros_in_hull`].
    pub fn zeros_in_hull(&self) -> Result<Vec<f64>> {
        zeros::zeros_in_hull(self)
    }

    /// Orthogonality residuals max_ν |∫ x^ν ŝ²_{1,j} A_n dσ_0| for each row j,
    /// evaluated on an independent finer rule, with the scale ‖a‖·‖M‖_F.
    pub fn orthogonality_residuals(&self) -> Result<(Vec<f64>, f64)> {
        let weights: Vec<Option<Measure>> = (0..=self.mix.m2())
            .map(|j| {
                if j == 0 {
                    Ok(None)
                } else {
                    self.mix.s2.s(1, j).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        let weight = |j: usize, x: f64| match &weights[j] {
            Some(s) => s.transform_real(x),
            None => Ok(1.0),
        };
        solver::residuals_against(self, &self.index.n2, weight, |_x, t, nu| t.powi(nu as i32))
    }
}

fn omega_c(n: usize, t: C64) -> C64 {
    let mut t0 = C64::new(1.0, 0.0);
    if n == 0 {
        return t0;
    }
    let mut t1 = t;
    for _ in 1..n {
        let t2 = t * t1 * 2.0 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// All weak compositions of `total` into `parts` non-negative parts, lexicographic.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = vec![];
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
