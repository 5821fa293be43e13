use nalgebra::{DMatrix, DVector};

use std::sync::Arc;

use super::{compositions, hp, MixedForm, MultiIndex2, NormalityReport};
use crate::error::{Error, Result};
use crate::measures::level_for;
use crate::nikishin::MixedSystem;
use crate::par;
use crate::poly::{cheb_values, ChebPoly};

/// Quadrature level policy for the solver.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Starting rule level on σ_0 (raised automatically for large |n|).
    pub level: usize,
    /// Highest level tried when the reduced system looks rank deficient.
    pub max_level: usize,
    /// Relative singular-value threshold for rank decisions.
    pub gap_threshold: f64,
    pub precision: Precision,
}

/// Arithmetic used by the solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Precision {
    /// Extended precision when every generator supports it and
    /// |n_1| + |n_2| ≥ [`AUTO_EXTENDED_SIZE`]; double otherwise.
    Auto,
    Double,
    /// Extended precision with the given number of bits.
    Bits(u32),
}

/// Size from which [`Precision::Auto`] switches to extended precision.
pub const AUTO_EXTENDED_SIZE: usize = 8;

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            level: 3,
            max_level: 6,
            gap_threshold: 1e-8,
            precision: Precision::Auto,
        }
    }
}

struct Sampled {
    t: Vec<f64>,
    sqrtw: Vec<f64>,
    sgn: Vec<f64>,
    f1: Vec<Vec<f64>>,
    f2: Vec<Vec<f64>>,
}

fn sample(mix: &MixedSystem, level: usize, total: usize) -> Result<Sampled> {
    let base = mix.base();
    let frame = base.hull();
    let rule = base.rule_at(level.max(level_for(2 * total + 32)))?;
    let mut s = Sampled {
        t: vec![],
        sqrtw: vec![],
        sgn: vec![],
        f1: vec![],
        f2: vec![],
    };
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        s.t.push(frame.to_unit(x));
        s.sqrtw.push(w.abs().sqrt());
        s.sgn.push(w.signum());
        s.f1.push(mix.s1.markov_vector_real(x)?);
        s.f2.push(mix.s2.markov_vector_real(x)?);
    }
    Ok(s)
}

/// Columns T_i(t) f_k(x) √|w|, block k holding i < n[k].
fn basis_matrix(s: &Sampled, n: &[usize], second: bool, signed: bool) -> DMatrix<f64> {
    let cols: usize = n.iter().sum();
    let maxn = n.iter().copied().max().unwrap_or(0);
    let rows = s.t.len();
    let mut m = DMatrix::zeros(rows, cols);
    for q in 0..rows {
        let tv = cheb_values(maxn, s.t[q]);
        let f = if second { &s.f2[q] } else { &s.f1[q] };
        let scale = s.sqrtw[q] * if signed { s.sgn[q] } else { 1.0 };
        let mut c = 0;
        for (k, &nk) in n.iter().enumerate() {
            for i in 0..nk {
                m[(q, c)] = tv[i] * f[k] * scale;
                c += 1;
            }
        }
    }
    m
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn remove_column(m: &DMatrix<f64>, c: usize) -> DMatrix<f64> {
    m.clone().remove_column(c)
}

pub fn solve_mixed(mix: &MixedSystem, n: &MultiIndex2) -> Result<MixedForm> {
    solve_mixed_with(mix, n, &SolveOptions::default())
}

pub fn solve_mixed_with(
    mix: &MixedSystem,
    n: &MultiIndex2,
    opts: &SolveOptions,
) -> Result<MixedForm> {
    n.validate(mix)?;
    let size = n.total1() + n.total2();
    let bits = match opts.precision {
        Precision::Bits(b) => Some(b),
        Precision::Auto if size >= AUTO_EXTENDED_SIZE && hp::system_supported(mix) => {
            Some(hp::default_bits(size))
        }
        _ => None,
    };
    if let Some(bits) = bits {
        let sol = hp::solve(mix, n, bits, opts.gap_threshold)?;
        let frame = mix.base().hull();
        let coeffs = sol
            .coeffs
            .into_iter()
            .map(|c| ChebPoly::new(frame, c))
            .collect();
        return finish(mix, n, coeffs, sol.report, Some(Arc::new(sol.form)));
    }
    let mut level = opts.level;
    loop {
        match attempt(mix, n, level, opts) {
            Err(Error::IllConditioned { .. }) if level < opts.max_level => level += 1,
            Err(Error::IllConditioned { gap }) => {
                return Err(Error::NullspaceTooLarge { nullity: 2, gap });
            }
            other => return other,
        }
    }
}

fn attempt(
    mix: &MixedSystem,
    n: &MultiIndex2,
    level: usize,
    opts: &SolveOptions,
) -> Result<MixedForm> {
    let p = n.total1();
    let r = n.total2();
    let thr = opts.gap_threshold;
    let s = sample(mix, level, p)?;
    let trial = basis_matrix(&s, &n.n1, false, false);
    let qr_c = trial.clone().qr();
    let qc = qr_c.q();
    let rc = qr_c.r();

    let (v, gap, nullity, qr_mat) = if r == 0 {
        (DVector::from_element(1, 1.0), 1.0, 1usize, None)
    } else {
        let test = basis_matrix(&s, &n.n2, true, true);
        let qr = test.qr().q();
        let mt = qr.transpose() * &qc;
        let mut pad = DMatrix::zeros(p, p);
        pad.view_mut((0, 0), (r, p)).copy_from(&mt);
        let svd = pad.svd(false, true);
        let vt = svd.v_t.as_ref().ok_or(Error::IllConditioned { gap: 0.0 })?;
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
        let gap = sv[p - 2] / sv[0];
        let nullity = 1 + sv[..p - 1].iter().filter(|&&x| x < thr * sv[0]).count();
        if gap < thr {
            return Err(Error::IllConditioned { gap });
        }
        let v = vt.row(idx[p - 1]).transpose();
        (v, gap, nullity, Some(qr))
    };
    let a = rc
        .solve_upper_triangular(&v)
        .filter(|a| a.iter().all(|x| x.is_finite()))
        .ok_or(Error::IllConditioned { gap })?;

    // degree margins: force a_{k, n_k − 1} = 0 and test the square system
    let mut margins = vec![f64::INFINITY; n.n1.len()];
    if let Some(qr) = &qr_mat {
        let mut offset = 0;
        for (k, &nk) in n.n1.iter().enumerate() {
            if nk >= 1 {
                let reduced = remove_column(&trial, offset + nk - 1);
                let qk = reduced.qr().q();
                let sq = qr.transpose() * qk;
                let sv = sorted_singular_values(&sq);
                margins[k] = sv.last().unwrap() / sv[0];
            }
            offset += nk;
        }
    }

    let norm = a.norm();
    let mut a: Vec<f64> = a.iter().map(|x| x / norm).collect();
    let big = a
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        a.iter_mut().for_each(|x| *x = -*x);
    }

    let frame = mix.base().hull();
    let mut coeffs = vec![];
    let mut degrees = vec![];
    let mut offset = 0;
    for (k, &nk) in n.n1.iter().enumerate() {
        let c = a[offset..offset + nk].to_vec();
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
        coeffs.push(ChebPoly::new(frame, c));
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
    finish(mix, n, coeffs, report, None)
}

/// Fills in the diagnostics that do not depend on the arithmetic used.
fn finish(
    mix: &MixedSystem,
    n: &MultiIndex2,
    coeffs: Vec<ChebPoly>,
    mut report: NormalityReport,
    hp: Option<Arc<hp::HpForm>>,
) -> Result<MixedForm> {
    report.lead_ratio = coeffs
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let mono = c.to_unit_monomial();
            let nrm = mono.iter().map(|x| x * x).sum::<f64>().sqrt();
            mono.last().unwrap().abs() / nrm.max(f64::MIN_POSITIVE)
        })
        .fold(f64::INFINITY, f64::min);
    let mut form = MixedForm {
        coeffs,
        mix: mix.clone(),
        index: n.clone(),
        report,
        hp,
    };
    let (res, scale) = form.orthogonality_residuals()?;
    form.report.residual = res.iter().copied().fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    Ok(form)
}

/// Max_ν |∫ b_ν(x) w_j(x) A_n(x) dσ_0| per row j and the scale ‖a‖·‖M‖_F, on
/// a rule finer than the one used for solving.
pub(crate) fn residuals_against(
    form: &MixedForm,
    counts: &[usize],
    weight: impl Fn(usize, f64) -> Result<f64>,
    basis: impl Fn(f64, f64, usize) -> f64,
) -> Result<(Vec<f64>, f64)> {
    let base = form.mix.base();
    let frame = base.hull();
    let p = form.index.total1();
    let rule = base.rule((4 * p + 96).max(256))?;
    let mut res = vec![0.0f64; counts.len()];
    let mut m_f2 = 0.0;
    for (j, &nj) in counts.iter().enumerate() {
        let mut rows = vec![0.0; nj];
        let mut mrows = vec![vec![0.0; p]; nj];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = frame.to_unit(x);
            let g = weight(j, x)?;
            let f = form.mix.s1.markov_vector_real(x)?;
            let ax: f64 = form
                .coeffs
                .iter()
                .zip(&f)
                .map(|(c, fk)| c.eval(x) * fk)
                .sum();
            let maxn = form.index.n1.iter().copied().max().unwrap_or(0);
            let tv = cheb_values(maxn, t);
            for nu in 0..nj {
                let b = basis(x, t, nu) * g * w;
                rows[nu] += b * ax;
                let mut c = 0;
                for (k, &nk) in form.index.n1.iter().enumerate() {
                    for i in 0..nk {
                        mrows[nu][c] += b * tv[i] * f[k];
                        c += 1;
                    }
                }
            }
        }
        res[j] = rows.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m_f2 += mrows.iter().flatten().map(|v| v * v).sum::<f64>();
    }
    let a_norm = form
        .coeffs
        .iter()
        .flat_map(|c| c.coef.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    Ok((res, a_norm * m_f2.sqrt()))
}

/// One row of a normality scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub index: MultiIndex2,
    pub result: Result<NormalityReport>,
}

/// Every (n_1; n_2) with 1 ≤ |n_1| ≤ max_total and |n_1| = |n_2| + 1, solved
/// independently (in parallel under the `parallel` feature).
pub fn normality_scan(mix: &MixedSystem, max_total: usize) -> Vec<ScanRow> {
    let mut indices = vec![];
    for total in 1..=max_total {
        for n1 in compositions(total, mix.m1() + 1) {
            for n2 in compositions(total - 1, mix.m2() + 1) {
                indices.push(MultiIndex2::new(n1.clone(), n2));
            }
        }
    }
    par::map(&indices, |idx| ScanRow {
        index: idx.clone(),
        result: solve_mixed(mix, idx).map(|f| f.report),
    })
}

/// Independent dense oracle: monomial coefficients (in x) of every a_{n,k},
/// from explicitly integrated mixed moments and a full SVD. Unit norm, largest
/// entry positive.
pub fn brute_force_coefficients(mix: &MixedSystem, n: &MultiIndex2) -> Result<Vec<Vec<f64>>> {
    n.validate(mix)?;
    let p = n.total1();
    let r = n.total2();
    let base = mix.base();
    let mut m = DMatrix::zeros(p, p);
    let mut row = 0;
    for (j, &nj) in n.n2.iter().enumerate() {
        let g = if j == 0 { None } else { Some(mix.s2.s(1, j)?) };
        for nu in 0..nj {
            let mut col = 0;
            for (k, &nk) in n.n1.iter().enumerate() {
                let f = if k == 0 { None } else { Some(mix.s1.s(1, k)?) };
                for i in 0..nk {
                    let val = base.integrate(
                        |x| {
                            let gv = g
                                .as_ref()
                                .map_or(1.0, |s| s.transform_real(x).unwrap_or(f64::NAN));
                            let fv = f
                                .as_ref()
                                .map_or(1.0, |s| s.transform_real(x).unwrap_or(f64::NAN));
                            x.powi((nu + i) as i32) * gv * fv
                        },
                        1e-15,
                    )?;
                    m[(row, col)] = val;
                    col += 1;
                }
            }
            row += 1;
        }
    }
    debug_assert_eq!(row, r);
    let svd = m.svd(false, true);
    let vt = svd.v_t.ok_or(Error::IllConditioned { gap: 0.0 })?;
    let imin = (0..p)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    let v: Vec<f64> = vt.row(imin).iter().copied().collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let big = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = big.signum() / nrm;
    let mut out = vec![];
    let mut off = 0;
    for &nk in &n.n1 {
        out.push(v[off..off + nk].iter().map(|x| x * s).collect());
        off += nk;
    }
    Ok(out)
}
