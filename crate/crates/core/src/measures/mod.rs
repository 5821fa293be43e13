//! Signed measures of constant sign on real compacts.
//!
//! Four representations share one handle type, [`Measure`]:
//!
//! * a Jacobi-type weight on an interval plus finitely many point masses,
//! * a moment-backed measure carrying a fixed Gauss rule,
//! * a *derivate* measure: a base measure multiplied by Cauchy-transform
//!   factors ŝ_num(x) / ŝ_den(x) of measures living on disjoint intervals,
//! * the *inverse* measure τ of s, defined by 1/ŝ = ℓ + τ̂ with ℓ affine.
//!
//! Every measure materializes Gauss-type rules at a ladder of resolutions
//! (16 … 4096 nodes); rules are computed on first use and cached. Derived
//! measures are interned by structure, so building the same expression twice
//! returns the same handle and the same caches.

mod gauss;
mod inverse;
mod moments;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex, OnceLock, Weak};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use moments::{gauss_from_moments, gauss_from_moments_in_frame};

/// Resolution ladder: level L has `16 << L` nodes.
pub const LEVELS: usize = 9;
pub const MAX_NODES: usize = 16 << (LEVELS - 1);
const DEFAULT_LEVEL: usize = 2;
/// τ-rules are never refined past this level (512 nodes); beyond it the
/// contour would need parent rules larger than the ladder provides.
const INVERSE_MAX_LEVEL: usize = 5;

pub fn level_nodes(level: usize) -> usize {
    16 << level
}

/// Smallest level with at least `n` nodes (saturating at the top).
pub fn level_for(n: usize) -> usize {
    (0..LEVELS)
        .find(|&l| level_nodes(l) >= n)
        .unwrap_or(LEVELS - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMeasure(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }
    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
    pub fn half(&self) -> f64 {
        0.5 * (self.b - self.a)
    }
    pub fn len(&self) -> f64 {
        self.b - self.a
    }
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.center()) / self.half()
    }
    pub fn from_unit(&self, t: f64) -> f64 {
        self.center() + self.half() * t
    }
    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
    pub fn overlaps(&self, o: &Interval) -> bool {
        self.a <= o.b && o.a <= self.b
    }
    pub fn hull(&self, o: &Interval) -> Interval {
        Interval {
            a: self.a.min(o.a),
            b: self.b.max(o.b),
        }
    }
    pub fn dist(&self, z: C64) -> f64 {
        let dx = if z.re < self.a {
            self.a - z.re
        } else if z.re > self.b {
            z.re - self.b
        } else {
            0.0
        };
        dx.hypot(z.im)
    }
    /// Bernstein-ellipse parameter of z: the ρ ≥ 1 whose ellipse passes through z.
    pub fn bernstein_rho(&self, z: C64) -> f64 {
        let w = (z - self.center()) / self.half();
        let s = (w - 1.0).sqrt() * (w + 1.0).sqrt();
        (w + s).norm().max((w - s).norm())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Nodes and (signed) weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
    pub fn apply_c(&self, f: impl Fn(f64) -> C64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
    pub fn transform(&self, z: C64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w / (z - x))
            .sum()
    }
}

/// ℓ(z) = a z + b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub fn eval(&self, z: C64) -> C64 {
        z * self.a + self.b
    }
}

/// ŝ_num(x)^{±1}·constant, as carried by derivate measures.
#[derive(Clone)]
pub struct CauchyFactor {
    pub numerator: Option<Measure>,
    pub denominator: Option<Measure>,
    pub constant: f64,
}

impl CauchyFactor {
    pub fn num(m: &Measure) -> Self {
        CauchyFactor {
            numerator: Some(m.clone()),
            denominator: None,
            constant: 1.0,
        }
    }
    pub fn den(m: &Measure) -> Self {
        CauchyFactor {
            numerator: None,
            denominator: Some(m.clone()),
            constant: 1.0,
        }
    }
    pub fn ratio(num: &Measure, den: &Measure) -> Self {
        CauchyFactor {
            numerator: Some(num.clone()),
            denominator: Some(den.clone()),
            constant: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JacobiWeight {
    pub interval: Interval,
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub point_masses: Vec<(f64, f64)>,
}

pub(crate) enum Repr {
    Jacobi(JacobiWeight),
    Moments {
        rule: Arc<QuadratureRule>,
    },
    Derivate {
        base: Measure,
        num: Vec<Measure>,
        den: Vec<Measure>,
        constant: f64,
    },
    Inverse {
        parent: Measure,
        ell: Affine,
    },
}

pub(crate) struct Node {
    id: u64,
    key: String,
    label: String,
    hull: Interval,
    sign: f64,
    repr: Repr,
    levels: [OnceLock<Result<Arc<QuadratureRule>>>; LEVELS],
    mass: OnceLock<f64>,
}

/// Shared handle to an immutable measure.
#[derive(Clone)]
pub struct Measure(Arc<Node>);

static NEXT_ID: AtomicU64 = AtomicU64::new(1);
static INTERN: LazyLock<Mutex<HashMap<String, Weak<Node>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn new_levels() -> [OnceLock<Result<Arc<QuadratureRule>>>; LEVELS] {
    std::array::from_fn(|_| OnceLock::new())
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Measure({} on {})", self.0.label, self.0.hull)
    }
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for Measure {}

impl Measure {
    // ---------- constructors ----------

    /// Jacobi-type weight scale·(b−x)^α (x−a)^β on [a,b] plus point masses
    /// (location, positive size) outside [a,b]; `sign` is ±1.
    pub fn jacobi(
        interval: Interval,
        alpha: f64,
        beta: f64,
        sign: f64,
        point_masses: Vec<(f64, f64)>,
    ) -> Result<Measure> {
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::InvalidMeasure(format!(
                "jacobi exponents must exceed −1, got ({alpha}, {beta})"
            )));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidMeasure(format!(
                "sign must be ±1, got {sign}"
            )));
        }
        let mut hull = interval;
        for &(x, m) in &point_masses {
            if !(m > 0.0) || !x.is_finite() {
                return Err(Error::InvalidMeasure(format!("bad point mass ({x}, {m})")));
            }
            if interval.contains(x) {
                return Err(Error::InvalidMeasure(format!(
                    "point mass at {x} lies inside the continuous part {interval}"
                )));
            }
            hull = hull.hull(&Interval { a: x, b: x });
        }
        let label = if alpha == 0.0 && beta == 0.0 {
            format!("Leb{interval}")
        } else {
            format!("Jac({alpha},{beta}){interval}")
        };
        Ok(Self::fresh(
            label,
            hull,
            sign,
            Repr::Jacobi(JacobiWeight {
                interval,
                alpha,
                beta,
                scale: 1.0,
                point_masses,
            }),
        ))
    }

    pub fn lebesgue(a: f64, b: f64) -> Result<Measure> {
        Self::jacobi(Interval::new(a, b)?, 0.0, 0.0, 1.0, vec![])
    }

    /// Chebyshev weight (1 − t²)^{−1/2} in the frame of [a,b].
    pub fn chebyshev(a: f64, b: f64) -> Result<Measure> {
        let iv = Interval::new(a, b)?;
        let m = Self::jacobi(iv, -0.5, -0.5, 1.0, vec![])?;
        // (b−x)(x−a) = h²(1−t²): rescale so the weight is exactly (1−t²)^{−1/2} dx
        Ok(m.with_scale(iv.half()))
    }

    fn with_scale(&self, s: f64) -> Measure {
        match &self.0.repr {
            Repr::Jacobi(j) => {
                let mut j = j.clone();
                j.scale *= s;
                Self::fresh(
                    self.0.label.clone(),
                    self.0.hull,
                    self.0.sign,
                    Repr::Jacobi(j),
                )
            }
            _ => unreachable!("rescaling applies to base measures only"),
        }
    }

    /// Moment-backed measure from moments taken in the frame variable
    /// t = (x − c)/h of `frame`; requires an even count.
    pub fn from_frame_moments(frame: Interval, t_moments: &[f64]) -> Result<Measure> {
        let rule = gauss_from_moments_in_frame(t_moments, frame)?;
        Ok(Self::from_rule(rule, "mom")?)
    }

    /// Moment-backed measure from raw power moments m_0..m_{2N−1}.
    pub fn from_moments(moments: &[f64]) -> Result<Measure> {
        let rule = gauss_from_moments(moments)?;
        Self::from_rule(rule, "mom")
    }

    /// A discrete measure given directly by its rule.
    pub fn from_rule(rule: QuadratureRule, label: &str) -> Result<Measure> {
        if rule.is_empty() {
            return Err(Error::InvalidMeasure("empty rule".into()));
        }
        let sign = rule.weights[0].signum();
        if rule.weights.iter().any(|w| w.signum() != sign) {
            return Err(Error::SignChangeDetected {
                label: label.into(),
            });
        }
        let a = rule.nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = rule.nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 1e-12 * (1.0 + a.abs().max(b.abs()));
        let hull = Interval {
            a: a - pad,
            b: b + pad,
        };
        Ok(Self::fresh(
            label.into(),
            hull,
            sign,
            Repr::Moments {
                rule: Arc::new(rule),
            },
        ))
    }

    fn fresh(label: String, hull: Interval, sign: f64, repr: Repr) -> Measure {
        let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        Measure(Arc::new(Node {
            id,
            key: format!("b{id}"),
            label,
            hull,
            sign,
            repr,
            levels: new_levels(),
            mass: OnceLock::new(),
        }))
    }

    fn interned(key: String, build: impl FnOnce() -> Result<Measure>) -> Result<Measure> {
        if let Some(n) = INTERN.lock().unwrap().get(&key).and_then(Weak::upgrade) {
            return Ok(Measure(n));
        }
        let m = build()?;
        let mut tab = INTERN.lock().unwrap();
        if let Some(n) = tab.get(&key).and_then(Weak::upgrade) {
            return Ok(Measure(n));
        }
        tab.insert(key, Arc::downgrade(&m.0));
        Ok(m)
    }

    /// ⟨σ_α, σ_β⟩: σ_α weighted by ŝ_β.
    pub fn product(alpha: &Measure, beta: &Measure) -> Result<Measure> {
        Self::weighted_derivate(alpha, &[CauchyFactor::num(beta)])
    }

    /// Nested product ⟨μ_0, μ_1, …, μ_k⟩ = ⟨μ_0, ⟨μ_1, …⟩⟩.
    pub fn chain(items: &[Measure]) -> Result<Measure> {
        let mut it = items.iter().rev();
        let mut acc = it.next().expect("chain needs at least one measure").clone();
        for m in it {
            acc = Self::product(m, &acc)?;
        }
        Ok(acc)
    }

    /// Base measure multiplied by Cauchy-transform factors.
    pub fn weighted_derivate(base: &Measure, factors: &[CauchyFactor]) -> Result<Measure> {
        let (root, mut num, mut den, mut constant) = match &base.0.repr {
            Repr::Derivate {
                base,
                num,
                den,
                constant,
            } => (base.clone(), num.clone(), den.clone(), *constant),
            _ => (base.clone(), vec![], vec![], 1.0),
        };
        for f in factors {
            if f.numerator.is_none() && f.denominator.is_none() && f.constant == 1.0 {
                continue;
            }
            for m in f.numerator.iter().chain(f.denominator.iter()) {
                if m.hull().overlaps(&root.hull()) {
                    let (h0, h1) = (root.hull(), m.hull());
                    return Err(Error::OverlappingSupports {
                        a0: h0.a,
                        b0: h0.b,
                        a1: h1.a,
                        b1: h1.b,
                    });
                }
            }
            if let Some(m) = &f.numerator {
                num.push(m.clone());
            }
            if let Some(m) = &f.denominator {
                den.push(m.clone());
            }
            constant *= f.constant;
        }
        // cancel common numerator/denominator factors
        let mut i = 0;
        while i < num.len() {
            if let Some(j) = den.iter().position(|d| d == &num[i]) {
                num.remove(i);
                den.remove(j);
            } else {
                i += 1;
            }
        }
        if num.is_empty() && den.is_empty() && constant == 1.0 {
            return Ok(root);
        }
        num.sort_by_key(|m| m.id());
        den.sort_by_key(|m| m.id());
        let mut key = format!("D{}", root.id());
        for m in &num {
            key.push_str(&format!("+{}", m.id()));
        }
        for m in &den {
            key.push_str(&format!("-{}", m.id()));
        }
        if constant != 1.0 {
            key.push_str(&format!("c{:e}", constant));
        }
        let label = {
            let mut s = String::new();
            for m in &num {
                s.push_str(&format!("·{}^", m.label()));
            }
            for m in &den {
                s.push_str(&format!("/{}^", m.label()));
            }
            if constant != 1.0 {
                s = format!("{constant}{s}");
            }
            format!("[{}{}]", root.label(), s)
        };
        Self::interned(key.clone(), move || {
            let repr = Repr::Derivate {
                base: root.clone(),
                num,
                den,
                constant,
            };
            let rule = derivate_rule(&repr, DEFAULT_LEVEL)?;
            let sign = rule.weights[0].signum();
            if rule.weights.iter().any(|w| w.signum() != sign || *w == 0.0) {
                return Err(Error::SignChangeDetected {
                    label: label.clone(),
                });
            }
            let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
            let node = Node {
                id,
                key,
                label,
                hull: root.hull(),
                sign,
                repr,
                levels: new_levels(),
                mass: OnceLock::new(),
            };
            let _ = node.levels[DEFAULT_LEVEL].set(Ok(Arc::new(rule)));
            Ok(Measure(Arc::new(node)))
        })
    }

    /// Inverse measure τ of s with 1/ŝ = ℓ + τ̂ (contour/Chebyshev-moment route).
    pub fn inverse(s: &Measure) -> Result<Measure> {
        let key = format!("I{}", s.id());
        let parent = s.clone();
        Self::interned(key.clone(), move || {
            let ell = parent.ell()?;
            let label = format!("τ[{}]", parent.label());
            let repr = Repr::Inverse {
                parent: parent.clone(),
                ell,
            };
            let rule = inverse::inverse_rule(&parent, ell, level_nodes(DEFAULT_LEVEL))?;
            let sign = -parent.sign();
            if rule.weights.iter().any(|w| w.signum() != sign) {
                return Err(Error::DerivateConstructionFailed(format!(
                    "{label}: mixed-sign rule"
                )));
            }
            let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
            let node = Node {
                id,
                key,
                label,
                hull: parent.hull(),
                sign,
                repr,
                levels: new_levels(),
                mass: OnceLock::new(),
            };
            let _ = node.levels[DEFAULT_LEVEL].set(Ok(Arc::new(rule)));
            Ok(Measure(Arc::new(node)))
        })
    }

    // ---------- accessors ----------

    pub fn id(&self) -> u64 {
        self.0.id
    }
    pub fn key(&self) -> &str {
        &self.0.key
    }
    pub fn label(&self) -> &str {
        &self.0.label
    }
    pub fn hull(&self) -> Interval {
        self.0.hull
    }
    pub fn sign(&self) -> f64 {
        self.0.sign
    }
    /// The weight of a Jacobi-type measure (None for derived measures).
    pub fn jacobi_weight(&self) -> Option<&JacobiWeight> {
        match &self.0.repr {
            Repr::Jacobi(j) => Some(j),
            _ => None,
        }
    }
    pub(crate) fn repr(&self) -> &Repr {
        &self.0.repr
    }
    pub fn is_inverse(&self) -> bool {
        matches!(self.0.repr, Repr::Inverse { .. })
    }
    /// Parent s when this is τ_s.
    pub fn inverse_parent(&self) -> Option<&Measure> {
        match &self.0.repr {
            Repr::Inverse { parent, .. } => Some(parent),
            _ => None,
        }
    }
    /// Base and factor lists when this is a derivate measure.
    pub fn derivate_parts(&self) -> Option<(&Measure, &[Measure], &[Measure], f64)> {
        match &self.0.repr {
            Repr::Derivate {
                base,
                num,
                den,
                constant,
            } => Some((base, num, den, *constant)),
            _ => None,
        }
    }

    /// Gauss-type rule at a ladder level.
    pub fn rule_at(&self, level: usize) -> Result<Arc<QuadratureRule>> {
        let level = level.min(LEVELS - 1);
        let level = match &self.0.repr {
            Repr::Moments { .. } => 0,
            Repr::Inverse { .. } => level.min(INVERSE_MAX_LEVEL),
            _ => level,
        };
        self.0.levels[level]
            .get_or_init(|| self.build_rule(level).map(Arc::new))
            .clone()
    }

    /// Rule with at least `n` nodes (or the finest available).
    pub fn rule(&self, n: usize) -> Result<Arc<QuadratureRule>> {
        self.rule_at(level_for(n))
    }

    pub fn default_rule(&self) -> Result<Arc<QuadratureRule>> {
        self.rule_at(DEFAULT_LEVEL)
    }

    fn build_rule(&self, level: usize) -> Result<QuadratureRule> {
        match &self.0.repr {
            Repr::Jacobi(j) => jacobi_rule(j, self.0.sign, level_nodes(level)),
            Repr::Moments { rule, .. } => Ok((**rule).clone()),
            Repr::Derivate { .. } => derivate_rule(&self.0.repr, level),
            Repr::Inverse { parent, ell } => {
                inverse::inverse_rule(parent, *ell, level_nodes(level))
            }
        }
    }

    /// Total (signed) mass |s| with the sign of the measure.
    pub fn mass(&self) -> f64 {
        *self.0.mass.get_or_init(|| match &self.0.repr {
            Repr::Jacobi(_) | Repr::Moments { .. } | Repr::Inverse { .. } => self
                .default_rule()
                .map(|r| r.weights.iter().sum())
                .unwrap_or(f64::NAN),
            Repr::Derivate { .. } => self.integrate(|_| 1.0, 1e-14).unwrap_or(f64::NAN),
        })
    }

    /// First-degree part of 1/ŝ: a = 1/m_0, b = −m_1/m_0².
    pub fn ell(&self) -> Result<Affine> {
        let r = self.rule(256)?;
        let m0: f64 = r.weights.iter().sum();
        if m0 == 0.0 || !m0.is_finite() {
            return Err(Error::SingularInversion);
        }
        let m1: f64 = r.apply(|x| x);
        Ok(Affine {
            a: 1.0 / m0,
            b: -m1 / (m0 * m0),
        })
    }

    /// Nodes needed so that a rule integrates 1/(z − x) to roughly machine precision.
    pub fn nodes_for(&self, z: C64) -> usize {
        let rho = self.0.hull.bernstein_rho(z);
        if rho <= 1.0 {
            return MAX_NODES;
        }
        let n = (18.5 / rho.ln()).ceil() as usize + 8;
        n.clamp(32, MAX_NODES)
    }

    fn check_off_support(&self, z: C64) -> Result<()> {
        let h = self.0.hull;
        if h.dist(z) <= 1e-8 * h.len() {
            return Err(Error::PointOnSupport {
                re: z.re,
                im: z.im,
                a: h.a,
                b: h.b,
            });
        }
        Ok(())
    }

    /// ŝ(z) = ∫ ds(x)/(z − x).
    pub fn cauchy_transform(&self, z: C64) -> Result<C64> {
        self.check_off_support(z)?;
        let r = self.rule(self.nodes_for(z))?;
        Ok(r.transform(z))
    }

    /// ŝ(x) for real x off the hull.
    pub fn transform_real(&self, x: f64) -> Result<f64> {
        Ok(self.cauchy_transform(C64::new(x, 0.0))?.re)
    }

    /// ŝ'(z) = −∫ ds(x)/(z − x)².
    pub fn cauchy_transform_deriv(&self, z: C64) -> Result<C64> {
        self.check_off_support(z)?;
        let r = self.rule(self.nodes_for(z) + 16)?;
        Ok(-r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w / ((z - x) * (z - x)))
            .sum::<C64>())
    }

    /// ∫ f ds with adaptive level doubling until two estimates agree within `tol`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        if let Repr::Moments { rule, .. } = &self.0.repr {
            return Ok(rule.apply(&f));
        }
        let mut prev = self.rule_at(0)?.apply(&f);
        let top = match self.0.repr {
            Repr::Inverse { .. } => INVERSE_MAX_LEVEL,
            _ => LEVELS - 1,
        };
        let mut change = f64::INFINITY;
        for level in 1..=top {
            let r = self.rule_at(level)?;
            let cur = r.apply(&f);
            let floor = 64.0 * f64::EPSILON * r.apply(|x| f(x).abs()).abs();
            change = (cur - prev).abs();
            if change <= tol.max(floor) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::NonConvergence {
            nodes: level_nodes(top),
            change,
        })
    }

    /// Complex-valued integrand version of [`Measure::integrate`].
    pub fn integrate_c(&self, f: impl Fn(f64) -> C64, tol: f64) -> Result<C64> {
        let re = self.integrate(|x| f(x).re, tol)?;
        let im = self.integrate(|x| f(x).im, tol)?;
        Ok(C64::new(re, im))
    }

    /// Power moments m_k = ∫ x^k ds, k < count.
    pub fn moments(&self, count: usize, tol: f64) -> Result<Vec<f64>> {
        (0..count)
            .map(|k| self.integrate(|x| x.powi(k as i32), tol))
            .collect()
    }

    /// Moments in the frame variable t = (x − c)/h of the hull.
    pub fn frame_moments(&self, count: usize, tol: f64) -> Result<Vec<f64>> {
        let h = self.0.hull;
        (0..count)
            .map(|k| self.integrate(|x| h.to_unit(x).powi(k as i32), tol))
            .collect()
    }

    /// Descriptor of a base measure (None for derived representations).
    pub fn descriptor(&self) -> Option<MeasureDescriptor> {
        match &self.0.repr {
            Repr::Jacobi(j) => {
                let kind = if j.alpha == 0.0 && j.beta == 0.0 {
                    "lebesgue"
                } else if j.alpha == -0.5 && j.beta == -0.5 && j.scale == j.interval.half() {
                    "chebyshev"
                } else {
                    "jacobi"
                };
                Some(MeasureDescriptor {
                    kind: kind.into(),
                    interval: [j.interval.a, j.interval.b],
                    alpha: j.alpha,
                    beta: j.beta,
                    sign: self.0.sign,
                    point_masses: j.point_masses.iter().map(|&(x, m)| [x, m]).collect(),
                })
            }
            _ => None,
        }
    }
}

fn jacobi_rule(j: &JacobiWeight, sign: f64, n: usize) -> Result<QuadratureRule> {
    let unit = gauss::gauss_jacobi_unit(n, j.alpha, j.beta)?;
    let iv = j.interval;
    let h = iv.half();
    let scale = sign * j.scale * h.powf(j.alpha + j.beta + 1.0);
    let mut pts: Vec<(f64, f64)> = unit
        .0
        .iter()
        .zip(&unit.1)
        .map(|(&t, &w)| (iv.from_unit(t), scale * w))
        .collect();
    for &(x, m) in &j.point_masses {
        pts.push((x, sign * m));
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(QuadratureRule {
        nodes: pts.iter().map(|p| p.0).collect(),
        weights: pts.iter().map(|p| p.1).collect(),
    })
}

fn derivate_rule(repr: &Repr, level: usize) -> Result<QuadratureRule> {
    let Repr::Derivate {
        base,
        num,
        den,
        constant,
    } = repr
    else {
        unreachable!()
    };
    let br = base.rule_at(level)?;
    let mut weights = Vec::with_capacity(br.len());
    for (&x, &w) in br.nodes.iter().zip(&br.weights) {
        let mut v = w * constant;
        for m in num {
            v *= m.transform_real(x)?;
        }
        for m in den {
            v /= m.transform_real(x)?;
        }
        weights.push(v);
    }
    Ok(QuadratureRule {
        nodes: br.nodes.clone(),
        weights,
    })
}

/// Serializable description of a base measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    /// "lebesgue", "chebyshev" or "jacobi".
    pub kind: String,
    pub interval: [f64; 2],
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub sign: f64,
    #[serde(default)]
    pub point_masses: Vec<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

impl MeasureDescriptor {
    pub fn lebesgue(a: f64, b: f64) -> Self {
        MeasureDescriptor {
            kind: "lebesgue".into(),
            interval: [a, b],
            alpha: 0.0,
            beta: 0.0,
            sign: 1.0,
            point_masses: vec![],
        }
    }

    pub fn build(&self) -> Result<Measure> {
        let iv = Interval::new(self.interval[0], self.interval[1])?;
        let pm: Vec<(f64, f64)> = self.point_masses.iter().map(|p| (p[0], p[1])).collect();
        let m = match self.kind.as_str() {
            "lebesgue" => Measure::jacobi(iv, 0.0, 0.0, self.sign, pm)?,
            "chebyshev" => Measure::jacobi(iv, -0.5, -0.5, self.sign, pm)?.with_scale(iv.half()),
            "jacobi" => Measure::jacobi(iv, self.alpha, self.beta, self.sign, pm)?,
            other => {
                return Err(Error::InvalidMeasure(format!(
                    "unknown measure kind '{other}'"
                )))
            }
        };
        Ok(m)
    }
}

/// Laurent-route inverse: ℓ and a moment-backed τ whose 2n frame moments come
/// from formal inversion of the moment series of s (2n + 2 moments of s).
pub fn inverse_measure(s: &Measure, n: usize) -> Result<(Affine, Measure)> {
    let frame = s.hull();
    let (c, h) = (frame.center(), frame.half());
    let mu = s.frame_moments(2 * n + 2, 1e-15)?;
    let (a_w, b_w, nu) = moments::laurent_inverse(&mu)?;
    let ell = Affine {
        a: a_w,
        b: h * b_w - a_w * c,
    };
    let tau_t: Vec<f64> = nu.iter().take(2 * n).map(|v| h * h * v).collect();
    let tau = Measure::from_frame_moments(frame, &tau_t).map_err(|e| match e {
        Error::IndefiniteHankel { index, value } => Error::IndefiniteHankel { index, value },
        other => other,
    })?;
    Ok((ell, tau))
}

#[cfg(test)]
mod tests;
