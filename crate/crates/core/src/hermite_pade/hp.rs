//! Extended-precision path of the mixed solver.
//!
//! Mixed test spaces such as span{x^ν} ⊕ span{x^ν ŝ(x)} are numerically
//! near-dependent: ŝ is approximated on the base interval by rationals with
//! geometric speed, so the principal angles that decide the form shrink like
//! ρ^{−|n|}. In double precision the computed null vector is meaningless once
//! |n| passes about 10. This module repeats the solver's algorithm (Gauss
//! sampling, orthonormal bases of trial and test spaces, principal-angle SVD,
//! degree margins) in MPFR arithmetic with a working precision that grows
//! with |n|. Every generator must be a Legendre or Chebyshev weight without
//! point masses, so that Gauss rules can be generated at any precision.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64 as C64;
use rug::Float;

use super::{MultiIndex2, NormalityReport};
use crate::error::{Error, Result};
use crate::measures::{Interval, Measure};
use crate::nikishin::{MixedSystem, NikishinSystem};

/// Working precision for an index with |n_1| + |n_2| = `size`.
pub fn default_bits(size: usize) -> u32 {
    let b = 128 + 14 * size as u32;
    b.div_ceil(64) * 64
}

fn fl(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

/// Gauss rule of a measure at arbitrary precision.
#[derive(Clone)]
pub(crate) struct HpRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

type UnitRule = Arc<(Vec<Float>, Vec<Float>)>;

static RULES: LazyLock<Mutex<HashMap<(u8, usize, u32), UnitRule>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Gauss–Legendre on [−1,1] by Newton on the three-term recurrence.
fn legendre_unit(n: usize, bits: u32) -> (Vec<Float>, Vec<Float>) {
    let eval = |x: &Float| -> (Float, Float) {
        let mut p0 = fl(bits, 1.0);
        let mut p1 = x.clone();
        for k in 1..n {
            let kf = k as f64;
            let p2 = (Float::with_val(bits, x * &p1) * (2.0 * kf + 1.0)
                - Float::with_val(bits, &p0 * kf))
                / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        // P_n' = n (x P_n − P_{n−1}) / (x² − 1)
        let x2m1 = Float::with_val(bits, x * x) - 1.0;
        let d = (Float::with_val(bits, x * &p1) - &p0) * (n as f64) / x2m1;
        (p1, d)
    };
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 8));
    let mut nodes = vec![fl(bits, 0.0); n];
    let mut weights = vec![fl(bits, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = fl(bits, guess);
        for _ in 0..100 {
            let (p, d) = eval(&x);
            let dx = p / &d;
            x -= &dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = eval(&x);
        let one_m = Float::with_val(bits, 1.0) - Float::with_val(bits, &x * &x);
        let w = Float::with_val(bits, 2.0) / (one_m * Float::with_val(bits, &d * &d));
        // nodes come out decreasing from the right end
        nodes[n - 1 - i] = x.clone();
        weights[n - 1 - i] = w.clone();
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = fl(bits, 0.0);
    }
    (nodes, weights)
}

/// Gauss–Chebyshev (first kind) on [−1,1]: closed form.
fn chebyshev_unit(n: usize, bits: u32) -> (Vec<Float>, Vec<Float>) {
    let pi = Float::with_val(bits, rug::float::Constant::Pi);
    let w = Float::with_val(bits, &pi / n as f64);
    let nodes = (0..n)
        .map(|i| {
            let a =
                Float::with_val(bits, &pi * (2.0 * (n - 1 - i) as f64 + 1.0)) / (2.0 * n as f64);
            a.cos()
        })
        .collect();
    (nodes, vec![w; n])
}

fn unit_rule(kind: u8, n: usize, bits: u32) -> UnitRule {
    let key = (kind, n, bits);
    if let Some(r) = RULES.lock().unwrap().get(&key) {
        return r.clone();
    }
    let r = Arc::new(if kind == 0 {
        legendre_unit(n, bits)
    } else {
        chebyshev_unit(n, bits)
    });
    RULES.lock().unwrap().insert(key, r.clone());
    r
}

/// Whether `m` admits arbitrary-precision rules.
pub fn supported(m: &Measure) -> bool {
    match m.jacobi_weight() {
        Some(j) => {
            j.point_masses.is_empty()
                && ((j.alpha == 0.0 && j.beta == 0.0) || (j.alpha == -0.5 && j.beta == -0.5))
        }
        None => false,
    }
}

pub fn system_supported(mix: &MixedSystem) -> bool {
    mix.s1
        .generators()
        .iter()
        .chain(mix.s2.generators())
        .all(supported)
}

fn hp_rule(m: &Measure, n: usize, bits: u32) -> Result<HpRule> {
    let j = m.jacobi_weight().filter(|_| supported(m)).ok_or_else(|| {
        Error::InvalidMeasure(format!("{} has no extended-precision rule", m.label()))
    })?;
    let n = n.div_ceil(16) * 16;
    let kind = if j.alpha == 0.0 { 0 } else { 1 };
    let unit = unit_rule(kind, n, bits);
    let iv = j.interval;
    let c: Float = (fl(bits, iv.a) + iv.b) / 2.0;
    let h: Float = (fl(bits, iv.b) - iv.a) / 2.0;
    let jac = if kind == 0 { h.clone() } else { fl(bits, 1.0) };
    let factor = jac * j.scale * m.sign();
    Ok(HpRule {
        nodes: unit
            .0
            .iter()
            .map(|t| Float::with_val(bits, t * &h) + &c)
            .collect(),
        weights: unit
            .1
            .iter()
            .map(|w| Float::with_val(bits, w * &factor))
            .collect(),
    })
}

/// Nodes for ρ^{−2N} below 2^{−bits} plus a polynomial degree allowance.
fn node_count(bits: u32, rho: f64, degree: usize) -> usize {
    let rho = rho.max(1.05);
    degree / 2 + (bits as f64 * std::f64::consts::LN_2 / (2.0 * rho.ln())).ceil() as usize + 16
}

fn rho_between(target: Interval, other: Interval) -> f64 {
    let pts = [other.a, other.b];
    pts.iter()
        .map(|&x| target.bernstein_rho(C64::new(x, 0.0)))
        .fold(f64::INFINITY, f64::min)
}

/// Values ŝ_{1,k}(x) of a Nikishin chain at given points of the base hull,
/// built from the innermost generator outwards, plus the σ_1 rule and the
/// values ŝ_{2,k} on its nodes (kept for later evaluation off the base).
pub(crate) struct HpChain {
    /// rule of σ_1 (absent when m = 0)
    first: Option<HpRule>,
    /// inner[k−1][q] = ŝ_{2,k}(t_q) at the σ_1 nodes (1 for k = 1)
    inner: Vec<Vec<Float>>,
}

impl HpChain {
    fn build(sys: &NikishinSystem, bits: u32) -> Result<Self> {
        let m = sys.m();
        if m == 0 {
            return Ok(HpChain {
                first: None,
                inner: vec![],
            });
        }
        let hull = |j: usize| sys.hull(j);
        let mut rules = vec![];
        for j in 1..=m {
            let mut rho = rho_between(hull(j), hull(j - 1));
            if j < m {
                rho = rho.min(rho_between(hull(j), hull(j + 1)));
            }
            rules.push(hp_rule(sys.sigma(j), node_count(bits, rho, 0), bits)?);
        }
        // inner[k−1] on σ_1 nodes
        let mut inner = vec![];
        for k in 1..=m {
            // u on σ_k nodes = 1, pushed down to σ_1 nodes
            let mut u: Vec<Float> = vec![fl(bits, 1.0); rules[k - 1].nodes.len()];
            for j in (2..=k).rev() {
                let (src, dst) = (&rules[j - 1], &rules[j - 2]);
                u = dst
                    .nodes
                    .iter()
                    .map(|x| {
                        let mut acc = fl(bits, 0.0);
                        for ((t, w), uv) in src.nodes.iter().zip(&src.weights).zip(&u) {
                            let d = Float::with_val(bits, x - t);
                            acc += Float::with_val(bits, w * uv) / d;
                        }
                        acc
                    })
                    .collect();
            }
            inner.push(u);
        }
        Ok(HpChain {
            first: Some(rules.swap_remove(0)),
            inner,
        })
    }

    fn m(&self) -> usize {
        self.inner.len()
    }

    /// (1, ŝ_{1,1}(x), …, ŝ_{1,m}(x)) at a real point off Δ_1.
    fn values_real(&self, x: &Float, bits: u32) -> Vec<Float> {
        let mut out = vec![fl(bits, 1.0)];
        if let Some(r) = &self.first {
            let recip: Vec<Float> = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(t, w)| Float::with_val(bits, w / Float::with_val(bits, x - t)))
                .collect();
            for u in &self.inner {
                let mut acc = fl(bits, 0.0);
                for (a, b) in recip.iter().zip(u) {
                    acc += Float::with_val(bits, a * b);
                }
                out.push(acc);
            }
        }
        out
    }

    /// Same at complex z, as (re, im) pairs.
    fn values_complex(&self, z: &(Float, Float), bits: u32) -> Vec<(Float, Float)> {
        let mut out = vec![(fl(bits, 1.0), fl(bits, 0.0))];
        if let Some(r) = &self.first {
            // w/(z − t) = w (conj(z) − t) / |z − t|²
            let recip: Vec<(Float, Float)> = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(t, w)| {
                    let dr = Float::with_val(bits, &z.0 - t);
                    let den = Float::with_val(bits, &dr * &dr) + Float::with_val(bits, &z.1 * &z.1);
                    let s = Float::with_val(bits, w / &den);
                    (
                        Float::with_val(bits, &dr * &s),
                        -Float::with_val(bits, &z.1 * &s),
                    )
                })
                .collect();
            for u in &self.inner {
                let (mut re, mut im) = (fl(bits, 0.0), fl(bits, 0.0));
                for (a, b) in recip.iter().zip(u) {
                    re += Float::with_val(bits, &a.0 * b);
                    im += Float::with_val(bits, &a.1 * b);
                }
                out.push((re, im));
            }
        }
        out
    }
}

/// Coefficients of a solved form kept at working precision, so that forms
/// whose terms cancel heavily (m_1 ≥ 1) can still be evaluated accurately.
pub struct HpForm {
    bits: u32,
    frame: Interval,
    /// Chebyshev coefficients in the hull variable, per component.
    coeffs: Vec<Vec<Float>>,
    chain: HpChain,
}

impl fmt::Debug for HpForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HpForm({} bits, {} components)",
            self.bits,
            self.coeffs.len()
        )
    }
}

impl HpForm {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub(crate) fn scaled(&self, s: f64) -> HpForm {
        HpForm {
            bits: self.bits,
            frame: self.frame,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|v| Float::with_val(self.bits, v * s))
                        .collect()
                })
                .collect(),
            chain: HpChain {
                first: self.chain.first.clone(),
                inner: self.chain.inner.clone(),
            },
        }
    }

    fn unit(&self, x: f64) -> Float {
        let b = self.bits;
        (fl(b, x) - self.frame.center()) / self.frame.half()
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        let b = self.bits;
        let t = self.unit(x);
        let f = self.chain.values_real(&fl(b, x), b);
        let mut acc = fl(b, 0.0);
        for (c, fk) in self.coeffs.iter().zip(&f) {
            acc += clenshaw_hp(c, &t, b) * fk;
        }
        acc.to_f64()
    }

    pub fn eval(&self, z: C64) -> C64 {
        let b = self.bits;
        let zz = (fl(b, z.re), fl(b, z.im));
        let t = (
            (fl(b, z.re) - self.frame.center()) / self.frame.half(),
            fl(b, z.im) / self.frame.half(),
        );
        let f = self.chain.values_complex(&zz, b);
        let (mut re, mut im) = (fl(b, 0.0), fl(b, 0.0));
        for (c, fk) in self.coeffs.iter().zip(&f) {
            let p = clenshaw_hp_c(c, &t, b);
            re += Float::with_val(b, &p.0 * &fk.0) - Float::with_val(b, &p.1 * &fk.1);
            im += Float::with_val(b, &p.0 * &fk.1) + Float::with_val(b, &p.1 * &fk.0);
        }
        C64::new(re.to_f64(), im.to_f64())
    }
}

fn clenshaw_hp(c: &[Float], t: &Float, bits: u32) -> Float {
    if c.is_empty() {
        return fl(bits, 0.0);
    }
    let (mut b1, mut b2) = (fl(bits, 0.0), fl(bits, 0.0));
    for ck in c.iter().skip(1).rev() {
        let b0 = Float::with_val(bits, t * &b1) * 2.0 - &b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    Float::with_val(bits, t * &b1) - &b2 + &c[0]
}

fn clenshaw_hp_c(c: &[Float], t: &(Float, Float), bits: u32) -> (Float, Float) {
    let z = || (fl(bits, 0.0), fl(bits, 0.0));
    if c.is_empty() {
        return z();
    }
    let mul = |a: &(Float, Float), b: &(Float, Float)| {
        (
            Float::with_val(bits, &a.0 * &b.0) - Float::with_val(bits, &a.1 * &b.1),
            Float::with_val(bits, &a.0 * &b.1) + Float::with_val(bits, &a.1 * &b.0),
        )
    };
    let (mut b1, mut b2) = (z(), z());
    for ck in c.iter().skip(1).rev() {
        let tb = mul(t, &b1);
        let b0 = (
            Float::with_val(bits, &tb.0 * 2.0) - &b2.0 + ck,
            Float::with_val(bits, &tb.1 * 2.0) - &b2.1,
        );
        b2 = b1;
        b1 = b0;
    }
    let tb = mul(t, &b1);
    (tb.0 - &b2.0 + &c[0], tb.1 - &b2.1)
}

// ---------- dense linear algebra at working precision ----------

/// Column-major dense matrix.
struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Float>>,
}

impl Mat {
    fn col(&self, j: usize) -> &[Float] {
        &self.data[j]
    }
}

fn dot(a: &[Float], b: &[Float], bits: u32) -> Float {
    let mut acc = fl(bits, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += Float::with_val(bits, x * y);
    }
    acc
}

/// Thin QR by modified Gram–Schmidt with one re-orthogonalization pass.
fn qr(a: &Mat, bits: u32) -> (Mat, Vec<Vec<Float>>) {
    let n = a.cols;
    let mut q: Vec<Vec<Float>> = vec![];
    let mut r = vec![vec![fl(bits, 0.0); n]; n];
    for j in 0..n {
        let mut v = a.col(j).to_vec();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &v, bits);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= Float::with_val(bits, qk * &c);
                }
                r[i][j] += c;
            }
        }
        let nrm = dot(&v, &v, bits).sqrt();
        r[j][j] = nrm.clone();
        if !nrm.is_zero() {
            for vk in v.iter_mut() {
                *vk /= &nrm;
            }
        }
        q.push(v);
    }
    (
        Mat {
            rows: a.rows,
            cols: n,
            data: q,
        },
        r,
    )
}

/// Aᵀ B for column-major A, B with equal row counts.
fn at_b(a: &Mat, b: &Mat, bits: u32) -> Mat {
    let data = (0..b.cols)
        .map(|j| (0..a.cols).map(|i| dot(a.col(i), b.col(j), bits)).collect())
        .collect();
    Mat {
        rows: a.cols,
        cols: b.cols,
        data,
    }
}

/// One-sided Jacobi SVD: singular values (column norms after convergence)
/// and right singular vectors as columns of V.
fn jacobi_svd(a: &Mat, bits: u32) -> (Vec<Float>, Vec<Vec<Float>>) {
    let n = a.cols;
    let mut u = a.data.clone();
    let mut v: Vec<Vec<Float>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| fl(bits, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 16));
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&u[i], &u[i], bits);
                let beta = dot(&u[j], &u[j], bits);
                let gamma = dot(&u[i], &u[j], bits);
                if gamma.is_zero() {
                    continue;
                }
                let lim = Float::with_val(bits, &alpha * &beta).sqrt() * &tol;
                if Float::with_val(bits, gamma.abs_ref()) <= lim {
                    continue;
                }
                rotated = true;
                let zeta: Float = (beta - &alpha) / Float::with_val(bits, &gamma * 2.0);
                let root: Float = Float::with_val(bits, &zeta * &zeta) + 1.0;
                let root = root.sqrt();
                let t = if zeta.is_sign_negative() {
                    -(fl(bits, 1.0) / (root - &zeta))
                } else {
                    fl(bits, 1.0) / (root + &zeta)
                };
                let tt: Float = Float::with_val(bits, &t * &t) + 1.0;
                let c = fl(bits, 1.0) / tt.sqrt();
                let s = Float::with_val(bits, &c * &t);
                for m in [&mut u, &mut v] {
                    let (left, right) = m.split_at_mut(j);
                    for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                        let nx = Float::with_val(bits, &c * &*x) - Float::with_val(bits, &s * &*y);
                        let ny = Float::with_val(bits, &s * &*x) + Float::with_val(bits, &c * &*y);
                        *x = nx;
                        *y = ny;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv = u.iter().map(|c| dot(c, c, bits).sqrt()).collect();
    (sv, v)
}

fn remove_col(a: &Mat, c: usize) -> Mat {
    let mut data = a.data.clone();
    data.remove(c);
    Mat {
        rows: a.rows,
        cols: a.cols - 1,
        data,
    }
}

/// Result of an extended-precision solve, rounded for the double-precision
/// form plus the working-precision copy.
pub(crate) struct HpSolve {
    pub coeffs: Vec<Vec<f64>>,
    pub report: NormalityReport,
    pub form: HpForm,
}

/// Same algorithm and conventions as the double-precision solver: unit
/// coefficient norm, largest entry positive, report fields with the same
/// meaning.
pub(crate) fn solve(mix: &MixedSystem, n: &MultiIndex2, bits: u32, thr: f64) -> Result<HpSolve> {
    if !system_supported(mix) {
        return Err(Error::InvalidMeasure(
            "system has no extended-precision rules".into(),
        ));
    }
    let p = n.total1();
    let r = n.total2();
    let base = mix.base();
    let frame = base.hull();
    let mut rho = f64::INFINITY;
    for sys in [&mix.s1, &mix.s2] {
        if sys.m() >= 1 {
            rho = rho.min(rho_between(frame, sys.hull(1)));
        }
    }
    let deg = n.n1.iter().max().copied().unwrap_or(0) + n.n2.iter().max().copied().unwrap_or(0);
    let rule = hp_rule(base, node_count(bits, rho, 2 * deg), bits)?;
    let c1 = HpChain::build(&mix.s1, bits)?;
    let c2 = HpChain::build(&mix.s2, bits)?;
    let (c, h) = (fl(bits, frame.center()), fl(bits, frame.half()));

    let rows = rule.nodes.len();
    let maxn = p.max(r) + 1;
    let mut trial = Mat {
        rows,
        cols: p,
        data: vec![Vec::with_capacity(rows); p],
    };
    let mut test = Mat {
        rows,
        cols: r,
        data: vec![Vec::with_capacity(rows); r],
    };
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = Float::with_val(bits, x - &c) / &h;
        let mut tv = vec![fl(bits, 1.0), t.clone()];
        while tv.len() < maxn {
            let l = tv.len();
            let next = Float::with_val(bits, &t * &tv[l - 1]) * 2.0 - &tv[l - 2];
            tv.push(next);
        }
        let sw = Float::with_val(bits, w.abs_ref()).sqrt();
        let sgn = if w.is_sign_negative() { -1.0 } else { 1.0 };
        let f1 = c1.values_real(x, bits);
        let f2 = c2.values_real(x, bits);
        let mut col = 0;
        for (k, &nk) in n.n1.iter().enumerate() {
            let fs = Float::with_val(bits, &f1[k] * &sw);
            for ti in tv.iter().take(nk) {
                trial.data[col].push(Float::with_val(bits, ti * &fs));
                col += 1;
            }
        }
        let mut col = 0;
        for (j, &nj) in n.n2.iter().enumerate() {
            let gs = Float::with_val(bits, &f2[j] * &sw) * sgn;
            for ti in tv.iter().take(nj) {
                test.data[col].push(Float::with_val(bits, ti * &gs));
                col += 1;
            }
        }
    }

    let (qc, rc) = qr(&trial, bits);
    let (v, gap, nullity, qt) = if r == 0 {
        let mut v = vec![fl(bits, 0.0); p];
        v[0] = fl(bits, 1.0);
        (v, 1.0, 1usize, None)
    } else {
        let (qt, _) = qr(&test, bits);
        let mt = at_b(&qt, &qc, bits);
        let (sv, vv) = jacobi_svd(&mt, bits);
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
        let s0 = sv[idx[0]].to_f64();
        let gap = if p >= 2 {
            sv[idx[p - 2]].to_f64() / s0
        } else {
            1.0
        };
        let nullity = 1 + idx[..p - 1]
            .iter()
            .filter(|&&i| sv[i].to_f64() < thr * s0)
            .count();
        if gap < thr {
            return Err(Error::NullspaceTooLarge {
                nullity: nullity.max(2),
                gap,
            });
        }
        (vv[idx[p - 1]].clone(), gap, nullity, Some(qt))
    };
    // a = R⁻¹ v
    let mut a = vec![fl(bits, 0.0); p];
    for i in (0..p).rev() {
        let mut acc = v[i].clone();
        for (k, ak) in a.iter().enumerate().skip(i + 1) {
            acc -= Float::with_val(bits, &rc[i][k] * ak);
        }
        if rc[i][i].is_zero() {
            return Err(Error::IllConditioned { gap: 0.0 });
        }
        a[i] = acc / &rc[i][i];
    }

    let mut margins = vec![f64::INFINITY; n.n1.len()];
    if let Some(qt) = &qt {
        let mut offset = 0;
        for (k, &nk) in n.n1.iter().enumerate() {
            if nk >= 1 {
                let (qk, _) = qr(&remove_col(&trial, offset + nk - 1), bits);
                let (sv, _) = jacobi_svd(&at_b(qt, &qk, bits), bits);
                let hi = sv.iter().map(|s| s.to_f64()).fold(0.0, f64::max);
                let lo = sv.iter().map(|s| s.to_f64()).fold(f64::INFINITY, f64::min);
                margins[k] = lo / hi;
            }
            offset += nk;
        }
    }

    let norm = dot(&a, &a, bits).sqrt();
    for x in a.iter_mut() {
        *x /= &norm;
    }
    let mut big = 0;
    for (i, x) in a.iter().enumerate() {
        if x.cmp_abs(&a[big]) == Some(std::cmp::Ordering::Greater) {
            big = i;
        }
    }
    if a[big].is_sign_negative() {
        for x in a.iter_mut() {
            *x = -x.clone();
        }
    }
    let mut coeffs = vec![];
    let mut hp_coeffs = vec![];
    let mut degrees = vec![];
    let mut offset = 0;
    for (k, &nk) in n.n1.iter().enumerate() {
        let block = a[offset..offset + nk].to_vec();
        let c: Vec<f64> = block.iter().map(|x| x.to_f64()).collect();
        let deg = if nk == 0 {
            -1
        } else if margins[k] >= thr {
            nk as i64 - 1
        } else {
            c.iter()
                .rposition(|x| x.abs() > 1e-12)
                .map(|i| i as i64)
                .unwrap_or(-1)
        };
        degrees.push(deg);
        coeffs.push(c);
        hp_coeffs.push(block);
        offset += nk;
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let report = NormalityReport {
        achieved_degrees: degrees,
        nullity,
        singular_gap: gap.min(min_margin),
        normal: nullity == 1 && min_margin >= thr,
        residual: 0.0,
        lead_ratio: 0.0,
    };
    let form = HpForm {
        bits,
        frame,
        coeffs: hp_coeffs,
        chain: c1,
    };
    debug_assert_eq!(form.chain.m(), mix.m1());
    Ok(HpSolve {
        coeffs,
        report,
        form,
    })
}
