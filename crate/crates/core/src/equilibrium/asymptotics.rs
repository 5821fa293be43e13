use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{build_interaction, proportions, supports, EquilibriumOptions, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::hermite_pade::{solve_mixed, MixedForm, MultiIndex2};
use crate::nikishin::MixedSystem;
use crate::par;

/// Indices base + k·step, k = 0, 1, …
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexRay {
    pub base: MultiIndex2,
    pub step: MultiIndex2,
}

impl IndexRay {
    pub fn new(base: MultiIndex2, step: MultiIndex2) -> Result<Self> {
        if base.n1.len() != step.n1.len() || base.n2.len() != step.n2.len() {
            return Err(Error::InvalidIndex(
                "base and step have different shapes".into(),
            ));
        }
        if step.total1() != step.total2() || step.total1() == 0 {
            return Err(Error::InvalidIndex(
                "step must be nonzero with |l_1| = |l_2|".into(),
            ));
        }
        Ok(IndexRay { base, step })
    }

    pub fn at(&self, k: usize) -> MultiIndex2 {
        let add = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(x, y)| x + k * y).collect();
        MultiIndex2::new(
            add(&self.base.n1, &self.step.n1),
            add(&self.base.n2, &self.step.n2),
        )
    }
}

/// Period step adding M/(m_i + 1) to every component, M = lcm(m_1 + 1, m_2 + 1).
pub fn lcm_step(m1: usize, m2: usize) -> MultiIndex2 {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let (a, b) = (m1 + 1, m2 + 1);
    let m = a / gcd(a, b) * b;
    MultiIndex2::new(vec![m / a; a], vec![m / b; b])
}

/// Equilibrium problem attached to the ray direction: proportions from the
/// step, supports from the system.
pub fn ray_equilibrium(
    mix: &MixedSystem,
    ray: &IndexRay,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumSolution> {
    let (p1, p2) = proportions(&ray.step)?;
    let c = build_interaction(&p1, &p2)?;
    super::solve_vector_equilibrium(&c, &supports(mix), opts)
}

/// G(z) = exp(P_1 V^{μ_1}(z) − P_0 V^{μ_0}(z) − 2 Σ_{k≥1} w_k/P_k); the μ_1
/// term and the sum vanish when the first system has no tail.
pub fn g_function(sol: &EquilibriumSolution, z: C64) -> Result<f64> {
    let c = &sol.interaction;
    let on = |j: i64| -> Result<()> {
        let m = sol.measure(j);
        let (a, b) = (m.cells[0][0], m.cells.last().unwrap()[1]);
        if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) && z.re >= a && z.re <= b {
            return Err(Error::PointOnSupport {
                re: z.re,
                im: z.im,
                a,
                b,
            });
        }
        Ok(())
    };
    on(0)?;
    let mut log_g = -c.big_p(0) * sol.measure(0).potential(z);
    if c.m1 >= 1 {
        on(1)?;
        log_g += c.big_p(1) * sol.measure(1).potential(z);
        log_g -= 2.0
            * (1..=c.m1 as i64)
                .map(|k| sol.constant(k) / c.big_p(k))
                .sum::<f64>();
    }
    Ok(log_g.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct NthRootRow {
    pub k: usize,
    pub index: MultiIndex2,
    /// log|A_n(z)| per probe (monic normalization).
    pub log_abs: Vec<f64>,
    /// |A_n(z)|^{1/|n_1|}.
    pub root: Vec<f64>,
    /// |root − G|/G.
    pub gap: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NthRootTable {
    pub probes: Vec<[f64; 2]>,
    pub g: Vec<f64>,
    pub rows: Vec<NthRootRow>,
    /// First index where the solver gave up, with its error; later k are dropped.
    pub truncated: Option<String>,
}

impl NthRootTable {
    /// Whether the gap strictly decreases along the rows at probe p.
    pub fn decreasing(&self, p: usize) -> bool {
        self.rows.windows(2).all(|w| w[1].gap[p] < w[0].gap[p])
    }
}

fn solve_ray(
    mix: &MixedSystem,
    ray: &IndexRay,
    ks: &[usize],
) -> (Vec<(usize, MixedForm)>, Option<String>) {
    let forms = par::map(ks, |&k| {
        solve_mixed(mix, &ray.at(k)).and_then(|f| f.monic_normalize())
    });
    let mut out = vec![];
    for (&k, f) in ks.iter().zip(forms) {
        match f {
            Ok(f) => out.push((k, f)),
            Err(e) => return (out, Some(format!("{}: {e}", ray.at(k)))),
        }
    }
    (out, None)
}

pub fn nth_root_compare(
    mix: &MixedSystem,
    ray: &IndexRay,
    ks: &[usize],
    probes: &[C64],
    sol: &EquilibriumSolution,
) -> Result<NthRootTable> {
    let g: Vec<f64> = probes
        .iter()
        .map(|&z| g_function(sol, z))
        .collect::<Result<_>>()?;
    let (forms, truncated) = solve_ray(mix, ray, ks);
    let mut rows = vec![];
    for (k, f) in forms {
        let t = f.index.total1() as f64;
        let log_abs: Vec<f64> = probes
            .iter()
            .map(|&z| f.eval(z).map(|v| v.norm().ln()))
            .collect::<Result<_>>()?;
        let root: Vec<f64> = log_abs.iter().map(|l| (l / t).exp()).collect();
        let gap = root
            .iter()
            .zip(&g)
            .map(|(r, g)| ((r - g) / g).abs())
            .collect();
        rows.push(NthRootRow {
            k,
            index: f.index.clone(),
            log_abs,
            root,
            gap,
        });
    }
    Ok(NthRootTable {
        probes: probes.iter().map(|z| [z.re, z.im]).collect(),
        g,
        rows,
        truncated,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub k: usize,
    pub index: MultiIndex2,
    /// r_k(z) = A_{n_{k+1}}(z)/A_{n_k}(z) per probe, as [re, im].
    pub ratio: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub probes: Vec<[f64; 2]>,
    pub rows: Vec<RatioRow>,
    /// |r_{k+1} − r_k| per probe (outer) and k (inner).
    pub diffs: Vec<Vec<f64>>,
    pub truncated: Option<String>,
}

impl RatioReport {
    pub fn decreasing(&self, p: usize) -> bool {
        self.diffs[p].windows(2).all(|w| w[1] < w[0])
    }
}

/// Ratios of consecutive monic forms along the ray. With `orthonormal`
/// (scalar case only) each Q_n is divided by its L²(σ_0) norm so the ratio
/// has a finite nonzero limit.
pub fn ratio_experiment(
    mix: &MixedSystem,
    ray: &IndexRay,
    ks: &[usize],
    probes: &[C64],
    orthonormal: bool,
) -> Result<RatioReport> {
    if orthonormal && (mix.m1() > 0 || mix.m2() > 0) {
        return Err(Error::PreconditionViolated(
            "orthonormal scaling needs m1 = m2 = 0".into(),
        ));
    }
    let mut all: Vec<usize> = ks.to_vec();
    if let Some(&last) = ks.last() {
        all.push(last + 1);
    }
    all.dedup();
    let (forms, truncated) = solve_ray(mix, ray, &all);
    let base = mix.base();
    let values: Vec<Vec<C64>> = forms
        .iter()
        .map(|(_, f)| {
            let scale = if orthonormal {
                let rule = base.rule(f.index.total1() + 16)?;
                let mut acc = 0.0;
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    acc += w * f.eval_real(x)?.powi(2);
                }
                1.0 / acc.sqrt()
            } else {
                1.0
            };
            probes
                .iter()
                .map(|&z| f.eval(z).map(|v| v * scale))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows = vec![];
    for i in 0..forms.len().saturating_sub(1) {
        if forms[i + 1].0 != forms[i].0 + 1 {
            continue;
        }
        let ratio = values[i]
            .iter()
            .zip(&values[i + 1])
            .map(|(a, b)| b / a)
            .map(|r| [r.re, r.im])
            .collect();
        rows.push(RatioRow {
            k: forms[i].0,
            index: forms[i].1.index.clone(),
            ratio,
        });
    }
    let diffs = (0..probes.len())
        .map(|p| {
            rows.windows(2)
                .filter(|w| w[1].k == w[0].k + 1)
                .map(|w| {
                    let (a, b) = (w[0].ratio[p], w[1].ratio[p]);
                    (C64::new(b[0], b[1]) - C64::new(a[0], a[1])).norm()
                })
                .collect()
        })
        .collect();
    Ok(RatioReport {
        probes: probes.iter().map(|z| [z.re, z.im]).collect(),
        rows,
        diffs,
        truncated,
    })
}
