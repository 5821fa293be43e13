//! Product, ratio and weighted-inverse identities between Cauchy transforms.
//!
//! Each case is checked by evaluating its two sides independently: the left
//! side as a quotient/product of transforms, the right side through derivate
//! and inverse measures built by the `measures` module.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{derivate, Chains};
use crate::error::{Error, Result};
use crate::measures::{Interval, Measure};
use crate::nikishin::NikishinSystem;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IdentityId {
    P21,
    P22,
    P23,
    F44,
    F45,
    F46,
    F47,
    F42,
    Inv2Star,
    Shirenu,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::P21,
        IdentityId::P22,
        IdentityId::P23,
        IdentityId::F44,
        IdentityId::F45,
        IdentityId::F46,
        IdentityId::F47,
        IdentityId::F42,
        IdentityId::Inv2Star,
        IdentityId::Shirenu,
    ];

    /// Default tolerance: single nesting 1e-8, double nesting 1e-6.
    pub fn tolerance(self) -> f64 {
        match self {
            IdentityId::F42 | IdentityId::Inv2Star | IdentityId::Shirenu => 1e-6,
            _ => 1e-8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::P21 => "P21",
            IdentityId::P22 => "P22",
            IdentityId::P23 => "P23",
            IdentityId::F44 => "F44",
            IdentityId::F45 => "F45",
            IdentityId::F46 => "F46",
            IdentityId::F47 => "F47",
            IdentityId::F42 => "F42",
            IdentityId::Inv2Star => "INV2STAR",
            IdentityId::Shirenu => "SHIRENU",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InputError(format!("unknown identity '{s}'")))
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measures an identity is instantiated with.
///
/// `alpha`, `beta`, `gamma` serve the two-/three-measure cases, `weight` is
/// the f·σ_γ measure, and `tail` (σ_1..σ_m, m ≥ 4) serves the chain ratios.
#[derive(Clone, Debug)]
pub struct Bindings {
    pub alpha: Measure,
    pub beta: Measure,
    pub gamma: Measure,
    pub weight: Measure,
    pub tail: NikishinSystem,
}

impl Bindings {
    /// Lebesgue measures on [−1,1], [2,3], [−4,−3]; f·σ_γ a Jacobi weight on
    /// [−4,−3]; tail on [2,3], [−1,1], [3.5,4.5], [−3,−2].
    pub fn standard() -> Result<Self> {
        let leb = Measure::lebesgue;
        Ok(Bindings {
            alpha: leb(-1.0, 1.0)?,
            beta: leb(2.0, 3.0)?,
            gamma: leb(-4.0, -3.0)?,
            weight: Measure::jacobi(Interval::new(-4.0, -3.0)?, 0.5, 1.5, 1.0, vec![])?,
            tail: NikishinSystem::build(vec![
                leb(2.0, 3.0)?,
                leb(-1.0, 1.0)?,
                leb(3.5, 4.5)?,
                leb(-3.0, -2.0)?,
            ])?,
        })
    }

    /// Stable FNV-1a hash of the binding labels, for CSV provenance.
    pub fn hash(&self) -> u64 {
        let mut text = format!(
            "{}|{}|{}|{}",
            self.alpha.label(),
            self.beta.label(),
            self.gamma.label(),
            self.weight.label()
        );
        for g in self.tail.generators() {
            text.push('|');
            text.push_str(g.label());
        }
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }

    fn supports(&self) -> Vec<Interval> {
        let mut v = vec![self.alpha.hull(), self.beta.hull(), self.gamma.hull()];
        v.extend(self.tail.generators().iter().map(|g| g.hull()));
        v
    }

    fn check(&self, id: IdentityId) -> Result<()> {
        let disjoint = |a: &Measure, b: &Measure| {
            if a.hull().overlaps(&b.hull()) {
                let (h0, h1) = (a.hull(), b.hull());
                Err(Error::OverlappingSupports {
                    a0: h0.a,
                    b0: h0.b,
                    a1: h1.a,
                    b1: h1.b,
                })
            } else {
                Ok(())
            }
        };
        match id {
            IdentityId::P21 | IdentityId::P22 | IdentityId::P23 => {
                disjoint(&self.alpha, &self.beta)
            }
            IdentityId::Inv2Star | IdentityId::Shirenu => {
                disjoint(&self.alpha, &self.beta)?;
                disjoint(&self.alpha, &self.gamma)?;
                disjoint(&self.alpha, &self.weight)
            }
            _ => {
                let need = if id == IdentityId::F42 { 4 } else { 3 };
                if self.tail.m() + 1 < need {
                    return Err(Error::PreconditionViolated(format!(
                        "{id} needs a tail of length {need}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One identity on concrete bindings.
#[derive(Clone, Debug)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub bindings: Bindings,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub id: String,
    pub bindings_hash: String,
    pub probe_re: f64,
    pub probe_im: f64,
    pub residual: f64,
}

/// {5+2i, −6, 0.5+4i}.
pub fn standard_probes() -> Vec<C64> {
    vec![C64::new(5.0, 2.0), C64::new(-6.0, 0.0), C64::new(0.5, 4.0)]
}

/// One side of an identity: a constant plus weighted Cauchy transforms.
struct Side {
    constant: f64,
    terms: Vec<(f64, Measure)>,
}

impl Side {
    fn eval(&self, z: C64) -> Result<C64> {
        let mut acc = C64::new(self.constant, 0.0);
        for (c, m) in &self.terms {
            acc += *c * m.cauchy_transform(z)?;
        }
        Ok(acc)
    }
}

type Lhs = Box<dyn Fn(C64) -> Result<C64> + Send + Sync>;

/// Left side as a closure over transforms plus one or two independent right
/// sides (the second form, where the identity has one).
struct Instance {
    lhs: Lhs,
    rhs: Vec<Side>,
}

fn instance(id: IdentityId, b: &Bindings) -> Result<Instance> {
    let (a, be, g) = (b.alpha.clone(), b.beta.clone(), b.gamma.clone());
    let t = Chains(&b.tail);
    let side = |constant: f64, terms: Vec<(f64, Measure)>| Side { constant, terms };
    Ok(match id {
        IdentityId::P21 => {
            let (a2, b2) = (a.clone(), be.clone());
            Instance {
                lhs: Box::new(move |z| Ok(a2.cauchy_transform(z)? * b2.cauchy_transform(z)?)),
                rhs: vec![side(
                    0.0,
                    vec![
                        (1.0, Measure::product(&a, &be)?),
                        (1.0, Measure::product(&be, &a)?),
                    ],
                )],
            }
        }
        IdentityId::P22 => {
            let sab = Measure::product(&a, &be)?;
            let tab = Measure::inverse(&sab)?;
            let m = derivate(&tab, &[&Measure::product(&be, &a)?], &[&be])?;
            let (a2, s2) = (a.clone(), sab.clone());
            Instance {
                lhs: Box::new(move |z| Ok(a2.cauchy_transform(z)? / s2.cauchy_transform(z)?)),
                rhs: vec![side(a.mass() / sab.mass(), vec![(1.0, m)])],
            }
        }
        IdentityId::P23 => {
            let sab = Measure::product(&a, &be)?;
            let taa = Measure::inverse(&a)?;
            let m = Measure::product(&taa, &Measure::product(&be, &a)?)?;
            let (a2, s2) = (a.clone(), sab.clone());
            Instance {
                lhs: Box::new(move |z| Ok(s2.cauchy_transform(z)? / a2.cauchy_transform(z)?)),
                rhs: vec![side(sab.mass() / a.mass(), vec![(-1.0, m)])],
            }
        }
        IdentityId::F44 => {
            let k = 3;
            let m = Measure::product(&t.tau(1, 1)?, &Measure::product(&t.s(2, k)?, &t.sig(1))?)?;
            Instance {
                lhs: ratio(&t, k, 1)?,
                rhs: vec![side(t.s(1, k)?.mass() / t.s(1, 1)?.mass(), vec![(-1.0, m)])],
            }
        }
        IdentityId::F45 => {
            let (j, k) = (2, 4);
            let mut chain = vec![t.tau(1, j)?];
            for i in 2..=j {
                chain.push(t.link(i, j)?);
            }
            chain.push(Measure::product(&t.s(j + 1, k)?, &t.sig(j))?);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            Instance {
                lhs: ratio(&t, k, j)?,
                rhs: vec![side(
                    t.s(1, k)?.mass() / t.s(1, j)?.mass(),
                    vec![(sign, Measure::chain(&chain)?)],
                )],
            }
        }
        IdentityId::F46 => {
            let j = 3;
            let c = t.s(1, 1)?.mass() / t.s(1, j)?.mass();
            let s2j_1 = Measure::product(&t.s(2, j)?, &t.sig(1))?;
            let t1j = t.tau(1, j)?;
            let form_a = derivate(&t1j, &[&s2j_1], &[&t.s(2, j)?])?;
            let two = Measure::product(&t1j, &t.link(2, j)?)?;
            Instance {
                lhs: ratio(&t, 1, j)?,
                rhs: vec![
                    side(c, vec![(1.0, form_a)]),
                    side(
                        c,
                        vec![(s2j_1.mass() / t.s(2, j)?.mass(), t1j), (-1.0, two)],
                    ),
                ],
            }
        }
        IdentityId::F47 => {
            let j = 3;
            let c = t.s(1, 2)?.mass() / t.s(1, j)?.mass();
            let s3j_2 = Measure::product(&t.s(3, j)?, &t.sig(2))?;
            let mid = derivate(&t.link(2, j)?, &[&s3j_2], &[&t.s(3, j)?])?;
            let form_a = Measure::product(&t.tau(1, j)?, &mid)?;
            let two = Measure::chain(&[t.tau(1, j)?, t.link(2, j)?])?;
            let three = Measure::chain(&[t.tau(1, j)?, t.link(2, j)?, t.link(3, j)?])?;
            Instance {
                lhs: ratio(&t, 2, j)?,
                rhs: vec![
                    side(c, vec![(-1.0, form_a)]),
                    side(
                        c,
                        vec![(-s3j_2.mass() / t.s(3, j)?.mass(), two), (1.0, three)],
                    ),
                ],
            }
        }
        IdentityId::F42 => {
            let j = 4;
            let c = t.s(1, 3)?.mass() / t.s(1, j)?.mass();
            let s4j_3 = Measure::product(&t.s(4, j)?, &t.sig(3))?;
            let last = derivate(&t.link(3, j)?, &[&s4j_3], &[&t.s(4, j)?])?;
            let form_a = Measure::chain(&[t.tau(1, j)?, t.link(2, j)?, last])?;
            let three = Measure::chain(&[t.tau(1, j)?, t.link(2, j)?, t.link(3, j)?])?;
            let four =
                Measure::chain(&[t.tau(1, j)?, t.link(2, j)?, t.link(3, j)?, t.link(4, j)?])?;
            Instance {
                lhs: ratio(&t, 3, j)?,
                rhs: vec![
                    side(c, vec![(1.0, form_a)]),
                    side(
                        c,
                        vec![(s4j_3.mass() / t.s(4, j)?.mass(), three), (-1.0, four)],
                    ),
                ],
            }
        }
        IdentityId::Inv2Star => {
            let f = b.weight.clone();
            let sab = Measure::product(&a, &be)?;
            let sba = Measure::product(&be, &a)?;
            let taa = Measure::inverse(&a)?;
            let inner = Measure::product(&taa, &sba)?;
            let left = Measure::product(&inner, &Measure::product(&f, &a)?)?;
            let right = derivate(
                &Measure::inverse(&sab)?,
                &[&sba, &Measure::chain(&[f, a.clone(), be.clone()])?],
                &[&be],
            )?;
            Instance {
                lhs: Box::new(move |z| {
                    Ok(a.cauchy_transform(z)? / sab.cauchy_transform(z)?
                        * left.cauchy_transform(z)?)
                }),
                rhs: vec![side(0.0, vec![(1.0, right)])],
            }
        }
        IdentityId::Shirenu => {
            let sab = Measure::product(&a, &be)?;
            let sba = Measure::product(&be, &a)?;
            let sab_g = Measure::product(&sab, &g)?;
            let left = derivate(
                &Measure::inverse(&sab)?,
                &[&sba, &Measure::chain(&[g.clone(), a.clone(), be.clone()])?],
                &[&be],
            )?;
            let bag = Measure::chain(&[be.clone(), a.clone(), g.clone()])?;
            let gab = Measure::chain(&[g.clone(), a.clone(), be.clone()])?;
            let right = derivate(&Measure::inverse(&sab_g)?, &[&bag, &gab], &[&be, &g])?;
            Instance {
                lhs: Box::new(move |z| {
                    Ok(sab.cauchy_transform(z)? / sab_g.cauchy_transform(z)?
                        * left.cauchy_transform(z)?)
                }),
                rhs: vec![side(0.0, vec![(1.0, right)])],
            }
        }
    })
}

fn ratio(t: &Chains, k: usize, j: usize) -> Result<Lhs> {
    let (num, den) = (t.s(1, k)?, t.s(1, j)?);
    Ok(Box::new(move |z| {
        Ok(num.cauchy_transform(z)? / den.cauchy_transform(z)?)
    }))
}

const FAR: f64 = 1e6;

impl IdentityCase {
    pub fn new(id: IdentityId, bindings: Bindings) -> Result<Self> {
        bindings.check(id)?;
        Ok(IdentityCase { id, bindings })
    }

    pub fn standard(id: IdentityId) -> Result<Self> {
        Self::new(id, Bindings::standard()?)
    }

    /// Residual |LHS − RHS| at each probe (max over the right-side forms).
    pub fn residuals(&self, probes: &[C64]) -> Result<Vec<f64>> {
        let inst = instance(self.id, &self.bindings)?;
        let far = C64::new(FAR, 0.0);
        let lf = (inst.lhs)(far)?;
        for r in &inst.rhs {
            let rf = r.eval(far)?;
            if (lf - rf).norm() > 1e-5 * lf.norm().max(rf.norm()) + 1e-300 {
                return Err(Error::ConstantMismatch {
                    lhs: lf.re,
                    rhs: rf.re,
                });
            }
        }
        let supports = self.bindings.supports();
        let mut out = vec![];
        for &z in probes {
            if let Some(iv) = supports.iter().find(|iv| iv.dist(z) < 1e-8 * iv.len()) {
                return Err(Error::PointOnSupport {
                    re: z.re,
                    im: z.im,
                    a: iv.a,
                    b: iv.b,
                });
            }
            let l = (inst.lhs)(z)?;
            let mut worst = 0.0f64;
            for r in &inst.rhs {
                worst = worst.max((l - r.eval(z)?).norm());
            }
            out.push(worst);
        }
        Ok(out)
    }
}

/// Max |LHS − RHS| over the probes.
pub fn verify_identity(case: &IdentityCase, probes: &[C64]) -> Result<f64> {
    Ok(case.residuals(probes)?.into_iter().fold(0.0, f64::max))
}

/// Probes at distance ≥ `min_dist` from every bound support.
pub fn filter_probes(b: &Bindings, probes: &[C64], min_dist: f64) -> Vec<C64> {
    let sup = b.supports();
    probes
        .iter()
        .copied()
        .filter(|&z| sup.iter().all(|iv| iv.dist(z) >= min_dist))
        .collect()
}

/// All ten cases on the standard bindings, one row per (case, probe).
pub fn identity_table(probes: &[C64]) -> Result<Vec<IdentityRow>> {
    let b = Bindings::standard()?;
    let hash = format!("{:016x}", b.hash());
    let per = par::map(&IdentityId::ALL, |&id| {
        IdentityCase::new(id, b.clone())?.residuals(probes)
    });
    let mut rows = vec![];
    for (id, res) in IdentityId::ALL.iter().zip(per) {
        for (z, r) in probes.iter().zip(res?) {
            rows.push(IdentityRow {
                id: id.name().into(),
                bindings_hash: hash.clone(),
                probe_re: z.re,
                probe_im: z.im,
                residual: r,
            });
        }
    }
    Ok(rows)
}
