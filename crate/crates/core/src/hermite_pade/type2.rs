use num_complex::Complex64 as C64;

use super::{omega_c, solve_mixed, MixedForm, MultiIndex2};
use crate::error::{Error, Result};
use crate::nikishin::{MixedSystem, NikishinSystem};
use crate::poly::{cheb_values, ChebPoly};

/// Type II approximants Q_n, P_{n,k} of (ŝ_{0,0}, …, ŝ_{0,m}).
#[derive(Clone, Debug)]
pub struct Type2Approximant {
    pub q: ChebPoly,
    pub p: Vec<ChebPoly>,
    pub n: Vec<usize>,
    pub sys: NikishinSystem,
    pub form: MixedForm,
}

/// Monic Q_n from the m_1 = 0 embedding, and P_{n,k}(z) = ∫ (Q_n(z) − Q_n(x))/(z − x) ds_{0,k}(x).
pub fn type2_pade(sys: &NikishinSystem, n: &[usize]) -> Result<Type2Approximant> {
    let total: usize = n.iter().sum();
    if total == 0 {
        return Err(Error::InvalidIndex("type II index needs |n| ≥ 1".into()));
    }
    if n.len() != sys.m() + 1 {
        return Err(Error::InvalidIndex(format!(
            "expected {} components, got {}",
            sys.m() + 1,
            n.len()
        )));
    }
    let mix = MixedSystem::type2(sys);
    let idx = MultiIndex2::new(vec![total + 1], n.to_vec());
    let form = solve_mixed(&mix, &idx)?.monic_normalize()?;
    let q = form.coeffs[0].clone();
    let mut p = vec![];
    for k in 0..=sys.m() {
        let rule = sys.s(0, k)?.rule(2 * total + 64)?;
        let mut acc = vec![0.0; total];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (quot, _) = q.divide_linear(x);
            for (a, c) in acc.iter_mut().zip(&quot.coef) {
                *a += w * c;
            }
        }
        p.push(ChebPoly::new(q.frame, acc));
    }
    Ok(Type2Approximant {
        q,
        p,
        n: n.to_vec(),
        sys: sys.clone(),
        form,
    })
}

impl Type2Approximant {
    pub fn total(&self) -> usize {
        self.n.iter().sum()
    }

    /// P_{n,k}(z)/Q_n(z).
    pub fn approximant(&self, k: usize, z: C64) -> C64 {
        self.p[k].eval_c(z) / self.q.eval_c(z)
    }

    /// ŝ_{0,k}(z) − P_{n,k}(z)/Q_n(z), computed as the remainder integral
    /// (1/(ωQ_n)(z)) ∫ ω Q_n ds_{0,k}/(z − x) with ω = T_{n_k} on the hull, so
    /// that errors far below machine epsilon are still resolved.
    pub fn markov_error(&self, k: usize, z: C64) -> Result<C64> {
        let s = self.sys.s(0, k)?;
        let frame = self.q.frame;
        let nk = self.n[k];
        let rule = s.rule(s.nodes_for(z).max(2 * self.total() + 64))?;
        let mut num = C64::new(0.0, 0.0);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let om = *cheb_values(nk + 1, frame.to_unit(x)).last().unwrap();
            num += w * om * self.q.eval(x) / (z - x);
        }
        let tz = (z - frame.center()) / frame.half();
        Ok(num / (omega_c(nk, tz) * self.q.eval_c(z)))
    }
}
