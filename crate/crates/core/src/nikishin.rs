//! Nikishin systems and the mixed pair (S¹, S²) sharing a base measure.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Interval, Measure, MeasureDescriptor};

/// Generators σ_0..σ_m with consecutive hulls disjoint, plus a cache of the
/// chained measures.
#[derive(Clone)]
pub struct NikishinSystem {
    generators: Vec<Measure>,
    cache: Arc<Mutex<HashMap<(usize, usize), Measure>>>,
}

impl std::fmt::Debug for NikishinSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.generators.iter()).finish()
    }
}

impl NikishinSystem {
    pub fn build(generators: Vec<Measure>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidMeasure(
                "a system needs at least one generator".into(),
            ));
        }
        for i in 1..generators.len() {
            if generators[i - 1].hull().overlaps(&generators[i].hull()) {
                return Err(Error::AdjacentOverlap {
                    first: i - 1,
                    second: i,
                });
            }
        }
        Ok(NikishinSystem {
            generators,
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Number of generators minus one.
    pub fn m(&self) -> usize {
        self.generators.len() - 1
    }

    pub fn generators(&self) -> &[Measure] {
        &self.generators
    }

    pub fn sigma(&self, j: usize) -> &Measure {
        &self.generators[j]
    }

    pub fn hull(&self, j: usize) -> Interval {
        self.generators[j].hull()
    }

    /// s_{j,k}: for j ≤ k the chain ⟨σ_j, σ_{j+1}, …, σ_k⟩; for j > k the
    /// reversed chain ⟨σ_j, σ_{j−1}, …, σ_k⟩. Indices are positions in the
    /// generator list.
    pub fn s(&self, j: usize, k: usize) -> Result<Measure> {
        if j == k {
            return Ok(self.generators[j].clone());
        }
        if let Some(m) = self.cache.lock().unwrap().get(&(j, k)) {
            return Ok(m.clone());
        }
        let next = if j < k { j + 1 } else { j - 1 };
        let inner = self.s(next, k)?;
        let m = Measure::product(&self.generators[j], &inner)?;
        self.cache.lock().unwrap().insert((j, k), m.clone());
        Ok(m)
    }

    /// ŝ_{j,k}(z).
    pub fn markov_function(&self, j: usize, k: usize, z: C64) -> Result<C64> {
        if j > k {
            return Err(Error::InvalidIndex(format!(
                "markov function needs j ≤ k, got ({j}, {k})"
            )));
        }
        self.s(j, k)?.cauchy_transform(z)
    }

    /// The tail system (σ_1, …, σ_m) (None when m = 0).
    pub fn tail(&self) -> Option<NikishinSystem> {
        if self.m() == 0 {
            return None;
        }
        NikishinSystem::build(self.generators[1..].to_vec()).ok()
    }

    /// Values 1, ŝ_{1,1}(x), …, ŝ_{1,m}(x).
    pub fn markov_vector(&self, x: C64) -> Result<Vec<C64>> {
        let mut v = vec![C64::new(1.0, 0.0)];
        for k in 1..=self.m() {
            v.push(self.markov_function(1, k, x)?);
        }
        Ok(v)
    }

    /// Real version of [`NikishinSystem::markov_vector`] for x on the base hull.
    pub fn markov_vector_real(&self, x: f64) -> Result<Vec<f64>> {
        let mut v = vec![1.0];
        for k in 1..=self.m() {
            v.push(self.s(1, k)?.transform_real(x)?);
        }
        Ok(v)
    }

    pub fn descriptor(&self) -> Option<Vec<MeasureDescriptor>> {
        self.generators.iter().map(|g| g.descriptor()).collect()
    }
}

/// Two Nikishin systems stemming from the same base measure σ_0.
#[derive(Clone, Debug)]
pub struct MixedSystem {
    pub s1: NikishinSystem,
    pub s2: NikishinSystem,
}

impl MixedSystem {
    pub fn new(s1: NikishinSystem, s2: NikishinSystem) -> Result<Self> {
        if s1.sigma(0) != s2.sigma(0) {
            return Err(Error::SharedBaseMismatch);
        }
        Ok(MixedSystem { s1, s2 })
    }

    /// Type II embedding: S¹ = (σ_0), S² = `sys`.
    pub fn type2(sys: &NikishinSystem) -> Self {
        let s1 = NikishinSystem::build(vec![sys.sigma(0).clone()]).expect("single generator");
        MixedSystem {
            s1,
            s2: sys.clone(),
        }
    }

    /// Type I embedding: S¹ = `sys`, S² = (σ_0).
    pub fn type1(sys: &NikishinSystem) -> Self {
        let s2 = NikishinSystem::build(vec![sys.sigma(0).clone()]).expect("single generator");
        MixedSystem {
            s1: sys.clone(),
            s2,
        }
    }

    pub fn m1(&self) -> usize {
        self.s1.m()
    }
    pub fn m2(&self) -> usize {
        self.s2.m()
    }
    pub fn base(&self) -> &Measure {
        self.s1.sigma(0)
    }

    /// W(x) = Uᵗ V with U = (1, ŝ²_{1,1}, …), V = (1, ŝ¹_{1,1}, …); rows follow S².
    pub fn mixed_weight_matrix(&self, x: f64) -> Result<Vec<Vec<f64>>> {
        let u = self.s2.markov_vector_real(x)?;
        let v = self.s1.markov_vector_real(x)?;
        Ok(u.iter()
            .map(|ui| v.iter().map(|vk| ui * vk).collect())
            .collect())
    }

    pub fn descriptor(&self) -> Option<SystemDescriptor> {
        Some(SystemDescriptor {
            s1: self.s1.descriptor()?,
            s2: self.s2.descriptor()?,
        })
    }
}

/// On-disk form of a mixed system: two ordered generator lists whose first
/// entries must coincide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub s1: Vec<MeasureDescriptor>,
    pub s2: Vec<MeasureDescriptor>,
}

impl SystemDescriptor {
    pub fn build(&self) -> Result<MixedSystem> {
        let (Some(b1), Some(b2)) = (self.s1.first(), self.s2.first()) else {
            return Err(Error::ValidationError(
                "both systems need a base measure".into(),
            ));
        };
        if b1 != b2 {
            return Err(Error::ValidationError(
                "s1 and s2 must share the same base measure".into(),
            ));
        }
        let base = b1
            .build()
            .map_err(|e| Error::ValidationError(e.to_string()))?;
        let mk = |list: &[MeasureDescriptor]| -> Result<NikishinSystem> {
            let mut g = vec![base.clone()];
            for d in &list[1..] {
                g.push(
                    d.build()
                        .map_err(|e| Error::ValidationError(e.to_string()))?,
                );
            }
            NikishinSystem::build(g).map_err(|e| Error::ValidationError(e.to_string()))
        };
        MixedSystem::new(mk(&self.s1)?, mk(&self.s2)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::IoError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn leb(a: f64, b: f64) -> Measure {
        Measure::lebesgue(a, b).unwrap()
    }

    #[test]
    fn single_generator() {
        let s = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        assert_eq!(s.s(0, 0).unwrap(), *s.sigma(0));
    }

    #[test]
    fn two_generator_mass() {
        let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 3.0)]).unwrap();
        // nested-quadrature oracle: ∫_{-1}^{1} ln((x−2)/(x−3)) dx by composite Simpson
        let n = 20000;
        let h = 2.0 / n as f64;
        let f = |x: f64| ((x - 2.0) / (x - 3.0)).ln();
        let mut acc = f(-1.0) + f(1.0);
        for i in 1..n {
            let x = -1.0 + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        let oracle = acc * h / 3.0;
        assert_relative_eq!(s.s(0, 1).unwrap().mass(), oracle, epsilon = 1e-10);
        assert_relative_eq!(oracle.abs(), (64.0f64 / 27.0).ln(), epsilon = 1e-10);
    }

    #[test]
    fn adjacent_overlap_rejected() {
        let e = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(0.0, 2.0)]).unwrap_err();
        assert_eq!(
            e,
            Error::AdjacentOverlap {
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn markov_function_mass_at_infinity() {
        let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 3.0)]).unwrap();
        let z = C64::new(1e6, 0.0);
        let v = s.markov_function(0, 1, z).unwrap() * z;
        assert_relative_eq!(v.re, s.s(0, 1).unwrap().mass(), max_relative = 1e-5);
    }

    #[test]
    fn product_identity_at_probe() {
        // σ̂_α σ̂_β = ⟨σ_α,σ_β⟩^ + ⟨σ_β,σ_α⟩^
        let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 3.0)]).unwrap();
        let z = C64::new(5.0, 1.0);
        let lhs = s.sigma(0).cauchy_transform(z).unwrap() * s.sigma(1).cauchy_transform(z).unwrap();
        let rhs = s.s(0, 1).unwrap().cauchy_transform(z).unwrap()
            + s.s(1, 0).unwrap().cauchy_transform(z).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn mixed_weight_matrix_rank_one() {
        let base = leb(-1.0, 1.0);
        let s1 = NikishinSystem::build(vec![base.clone(), leb(2.0, 3.0)]).unwrap();
        let s2 = NikishinSystem::build(vec![base, leb(-4.0, -3.0)]).unwrap();
        let mix = MixedSystem::new(s1.clone(), s2.clone()).unwrap();
        let x = 0.3;
        let w = mix.mixed_weight_matrix(x).unwrap();
        assert_eq!(w[0][0], 1.0);
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        assert!(det.abs() < 1e-14);
        let direct = s2.s(1, 1).unwrap().transform_real(x).unwrap()
            * s1.s(1, 1).unwrap().transform_real(x).unwrap();
        assert_relative_eq!(w[1][1], direct, epsilon = 1e-15);
    }

    #[test]
    fn shared_base_enforced_by_identity() {
        let s1 = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        let s2 = NikishinSystem::build(vec![leb(-1.0, 1.0)]).unwrap();
        assert_eq!(
            MixedSystem::new(s1, s2).unwrap_err(),
            Error::SharedBaseMismatch
        );
    }

    #[test]
    fn descriptor_validation() {
        let d = SystemDescriptor {
            s1: vec![MeasureDescriptor::lebesgue(-1.0, 1.0)],
            s2: vec![MeasureDescriptor::lebesgue(-1.0, 0.5)],
        };
        assert!(matches!(d.build(), Err(Error::ValidationError(_))));
    }

    #[test]
    fn descriptor_roundtrip_preserves_masses() {
        let d = SystemDescriptor {
            s1: vec![
                MeasureDescriptor::lebesgue(-1.0, 1.0),
                MeasureDescriptor::lebesgue(2.0, 3.0),
            ],
            s2: vec![
                MeasureDescriptor::lebesgue(-1.0, 1.0),
                MeasureDescriptor::lebesgue(-4.0, -3.0),
            ],
        };
        let mix = d.build().unwrap();
        let text = d.to_toml().unwrap();
        let back = SystemDescriptor::from_toml(&text).unwrap().build().unwrap();
        let m_a = mix.s1.s(0, 1).unwrap().mass();
        let m_b = back.s1.s(0, 1).unwrap().mass();
        assert!((m_a - m_b).abs() < 1e-12);
        assert_eq!(mix.descriptor().unwrap(), d);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn tail_transforms_have_constant_sign(gap in 0.2f64..2.0, w in 0.3f64..2.0) {
                let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(1.0 + gap, 1.0 + gap + w), leb(-3.0 - w, -3.0)]).unwrap();
                for k in 1..=2 {
                    let sk = s.s(1, k).unwrap();
                    let sgn = sk.transform_real(-1.0).unwrap().signum();
                    for i in 0..512 {
                        let x = -1.0 + 2.0 * i as f64 / 511.0;
                        prop_assert_eq!(sk.transform_real(x).unwrap().signum(), sgn);
                    }
                }
            }

            #[test]
            fn all_chain_measures_share_base_support(w in 0.3f64..2.0) {
                let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 2.0 + w), leb(-5.0, -4.0)]).unwrap();
                for k in 0..=2 {
                    prop_assert_eq!(s.s(0, k).unwrap().hull(), s.hull(0));
                }
            }

            #[test]
            fn cached_chain_matches_flattened(w in 0.3f64..2.0, re in 4.0f64..8.0, im in -2.0f64..2.0) {
                let s = NikishinSystem::build(vec![leb(-1.0, 1.0), leb(2.0, 2.0 + w), leb(-5.0, -4.0)]).unwrap();
                let flat = Measure::chain(s.generators()).unwrap();
                let z = C64::new(re, im);
                let a = s.s(0, 2).unwrap().cauchy_transform(z).unwrap();
                let b = flat.cauchy_transform(z).unwrap();
                prop_assert!((a - b).norm() < 1e-9);
            }
        }
    }
}
