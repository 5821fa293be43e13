use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::InteractionMatrix;
use crate::error::{Error, Result};
use crate::measures::Interval;
use crate::par;

/// External field on one component.
pub type Field = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct EquilibriumOptions {
    /// Cells per component (split over its intervals by length).
    pub grid: usize,
    pub max_iter: usize,
    /// Stop once the Frank–Wolfe duality gap is below gap_tol·max(1, |J|).
    pub gap_tol: f64,
    /// Per-component fields in the order −m_2, …, m_1; empty means none.
    pub fields: Vec<Option<Field>>,
    /// Random initial masses instead of the uniform start.
    pub seed: Option<u64>,
    pub grading: Grading,
}

/// Cell layout on each interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Grading {
    Uniform,
    /// Edges at the Chebyshev–Lobatto points, refining towards the endpoints
    /// where equilibrium densities blow up.
    Chebyshev,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            grid: 512,
            max_iter: 50_000,
            gap_tol: 1e-10,
            fields: vec![],
            seed: None,
            grading: Grading::Chebyshev,
        }
    }
}

/// Piecewise-constant probability measure on a union of intervals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscretizedMeasure {
    pub cells: Vec<[f64; 2]>,
    /// Cell midpoints.
    pub grid: Vec<f64>,
    pub masses: Vec<f64>,
}

impl DiscretizedMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// V^μ(z) = ∫ log 1/|z − y| dμ(y), integrating each cell exactly.
    pub fn potential(&self, z: C64) -> f64 {
        if z.im == 0.0 {
            return self.potential_real(z.re);
        }
        let h1 = |u: C64| u * u.ln() - u;
        self.cells
            .iter()
            .zip(&self.masses)
            .filter(|(_, m)| **m != 0.0)
            .map(|(c, m)| -m / (c[1] - c[0]) * (h1(z - c[0]) - h1(z - c[1])).re)
            .sum()
    }

    pub fn potential_real(&self, x: f64) -> f64 {
        self.cells
            .iter()
            .zip(&self.masses)
            .filter(|(_, m)| **m != 0.0)
            .map(|(c, m)| -m * cell_log_integral(x, c[0], c[1]) / (c[1] - c[0]))
            .sum()
    }

    /// μ([a, b]), splitting partially covered cells linearly.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.cells
            .iter()
            .zip(&self.masses)
            .map(|(c, m)| {
                let overlap = (b.min(c[1]) - a.max(c[0])).max(0.0);
                m * overlap / (c[1] - c[0])
            })
            .sum()
    }

    /// Total variation sup_A |μ(A) − ν(A)| against the cell masses of a
    /// reference distribution function.
    pub fn tv_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        0.5 * self
            .cells
            .iter()
            .zip(&self.masses)
            .map(|(c, m)| (m - (cdf(c[1]) - cdf(c[0]))).abs())
            .sum::<f64>()
    }

    pub fn density(&self) -> Vec<f64> {
        self.cells
            .iter()
            .zip(&self.masses)
            .map(|(c, m)| m / (c[1] - c[0]))
            .collect()
    }
}

/// ∫_a^b log|x − y| dy.
fn cell_log_integral(x: f64, a: f64, b: f64) -> f64 {
    let g = |t: f64| if t == 0.0 { 0.0 } else { t * t.abs().ln() - t };
    g(x - a) - g(x - b)
}

/// Second antiderivative of log|t|.
fn f2(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        0.5 * t * t * t.abs().ln() - 0.75 * t * t
    }
}

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Mean of log 1/|x − y| over the cell pair; exact for neighbours, 3×3 Gauss
/// once the cells are well separated (the exact form cancels badly there).
fn pair_average(p: [f64; 2], q: [f64; 2]) -> f64 {
    let (hp, hq) = (p[1] - p[0], q[1] - q[0]);
    let sep = (0.5 * (p[0] + p[1]) - 0.5 * (q[0] + q[1])).abs();
    if sep <= 4.0 * (hp + hq) {
        let s = f2(p[1] - q[0]) - f2(p[0] - q[0]) - f2(p[1] - q[1]) + f2(p[0] - q[1]);
        return -s / (hp * hq);
    }
    let mut acc = 0.0;
    for (u, wu) in GL3 {
        let x = 0.5 * (p[0] + p[1]) + 0.5 * hp * u;
        for (v, wv) in GL3 {
            let y = 0.5 * (q[0] + q[1]) + 0.5 * hq * v;
            acc += wu * wv * (x - y).abs().ln();
        }
    }
    -acc / 4.0
}

fn make_cells(intervals: &[Interval], grid: usize, grading: Grading) -> Result<Vec<[f64; 2]>> {
    if intervals.is_empty() || grid == 0 {
        return Err(Error::InputError(
            "each component needs a support and a positive grid".into(),
        ));
    }
    let total: f64 = intervals.iter().map(|i| i.len()).sum();
    let mut cells = Vec::with_capacity(grid);
    for (i, iv) in intervals.iter().enumerate() {
        let n = if i + 1 == intervals.len() {
            grid.saturating_sub(cells.len()).max(1)
        } else {
            ((grid as f64 * iv.len() / total).round() as usize).max(1)
        };
        let edge = |k: usize| match grading {
            Grading::Uniform => iv.a + iv.len() * k as f64 / n as f64,
            Grading::Chebyshev => {
                iv.a + iv.len() * 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos())
            }
        };
        cells.extend((0..n).map(|k| {
            [
                if k == 0 { iv.a } else { edge(k) },
                if k + 1 == n { iv.b } else { edge(k + 1) },
            ]
        }));
    }
    Ok(cells)
}

#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    pub interaction: InteractionMatrix,
    /// One measure per component, order −m_2, …, m_1.
    pub measures: Vec<DiscretizedMeasure>,
    /// w_j: μ_j-average of W_j + φ_j.
    pub constants: Vec<f64>,
    /// J(μ) + 2Σ∫φ_j dμ_j.
    pub energy: f64,
    /// Pointwise violation of the equilibrium conditions at cell midpoints.
    pub residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub energy_trace: Vec<f64>,
}

impl EquilibriumSolution {
    pub fn measure(&self, j: i64) -> &DiscretizedMeasure {
        &self.measures[self.interaction.pos(j)]
    }

    pub fn constant(&self, j: i64) -> f64 {
        self.constants[self.interaction.pos(j)]
    }

    /// W_j(z) = Σ_k c_{j,k} V^{μ_k}(z).
    pub fn combined_potential(&self, j: i64, z: C64) -> f64 {
        self.interaction
            .components()
            .map(|k| self.interaction.c(j, k) * self.measure(k).potential(z))
            .sum()
    }
}

fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (mut cs, mut theta) = (0.0, 0.0);
    for (j, &uj) in u.iter().enumerate() {
        cs += uj;
        let t = (cs - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Minimizes the discretized energy over the product of simplices with an
/// accelerated projected gradient whose steps are accepted through an exact
/// line search on the quadratic (so the energy never increases), restarted
/// whenever the search rejects the step.
pub fn solve_vector_equilibrium(
    c: &InteractionMatrix,
    supports: &[Vec<Interval>],
    opts: &EquilibriumOptions,
) -> Result<EquilibriumSolution> {
    let d = c.dim();
    if supports.len() != d {
        return Err(Error::InputError(format!(
            "expected {d} supports, got {}",
            supports.len()
        )));
    }
    if !c.is_psd() {
        return Err(Error::IndefiniteInteraction(c.min_eigenvalue));
    }
    if !opts.fields.is_empty() && opts.fields.len() != d {
        return Err(Error::InputError(format!(
            "expected {d} fields, got {}",
            opts.fields.len()
        )));
    }
    let cells: Vec<Vec<[f64; 2]>> = supports
        .iter()
        .map(|s| make_cells(s, opts.grid, opts.grading))
        .collect::<Result<_>>()?;
    let mut off = vec![0];
    for cs in &cells {
        off.push(off.last().unwrap() + cs.len());
    }
    let n = off[d];
    let owner: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (0..cells[j].len()).map(move |i| (j, i)))
        .collect();

    let rows = par::map_range(n, |r| {
        let (j, i) = owner[r];
        let p = cells[j][i];
        let mut row = vec![0.0; n];
        for (k, ck) in cells.iter().enumerate() {
            let cjk = c.entries[(j, k)];
            if cjk == 0.0 {
                continue;
            }
            for (l, q) in ck.iter().enumerate() {
                row[off[k] + l] = cjk * pair_average(p, *q);
            }
        }
        row
    });
    let h = nalgebra::DMatrix::from_fn(n, n, |r, s| rows[r][s]);
    drop(rows);

    let phi = DVector::from_fn(n, |r, _| {
        let (j, i) = owner[r];
        match opts.fields.get(j).and_then(|f| f.as_ref()) {
            Some(f) => {
                let [a, b] = cells[j][i];
                GL3.iter()
                    .map(|(u, w)| w * f(0.5 * (a + b) + 0.5 * (b - a) * u))
                    .sum::<f64>()
                    / 2.0
            }
            None => 0.0,
        }
    });

    let project = |v: &mut DVector<f64>| {
        for j in 0..d {
            project_simplex(&mut v.as_mut_slice()[off[j]..off[j + 1]]);
        }
    };
    let center = |v: &mut DVector<f64>| {
        for j in 0..d {
            let s = &mut v.as_mut_slice()[off[j]..off[j + 1]];
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            s.iter_mut().for_each(|x| *x -= mean);
        }
    };

    // Lipschitz constant of the gradient on the tangent space of the simplices.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
    center(&mut v);
    let mut lambda = 0.0;
    for _ in 0..80 {
        let nv = v.norm();
        if nv == 0.0 {
            break;
        }
        v /= nv;
        let mut w = &h * &v;
        center(&mut w);
        lambda = v.dot(&w);
        v = w;
    }
    let lip = 2.0 * lambda.abs().max(1e-12) * 1.1;

    let mut x = DVector::zeros(n);
    let mut start_rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    for j in 0..d {
        for i in 0..cells[j].len() {
            let [a, b] = cells[j][i];
            let len: f64 = supports[j].iter().map(|s| s.len()).sum();
            x[off[j] + i] = match &mut start_rng {
                Some(r) => r.gen::<f64>(),
                None => (b - a) / len,
            };
        }
        let s = &mut x.as_mut_slice()[off[j]..off[j + 1]];
        let t: f64 = s.iter().sum();
        s.iter_mut().for_each(|m| *m /= t);
    }
    let energy = |x: &DVector<f64>, hx: &DVector<f64>| x.dot(hx) + 2.0 * phi.dot(x);
    let fw_gap = |x: &DVector<f64>, hx: &DVector<f64>| {
        let g = (hx + &phi) * 2.0;
        (0..d)
            .map(|j| {
                let (gs, xs) = (
                    &g.as_slice()[off[j]..off[j + 1]],
                    &x.as_slice()[off[j]..off[j + 1]],
                );
                let min = gs.iter().cloned().fold(f64::INFINITY, f64::min);
                gs.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>() - min
            })
            .sum::<f64>()
    };

    let mut hx = &h * &x;
    let mut j_val = energy(&x, &hx);
    let mut trace = vec![j_val];
    let (mut y, mut hy) = (x.clone(), hx.clone());
    let mut theta: f64 = 1.0;
    let mut gap = fw_gap(&x, &hx);
    let mut it = 0;
    while it < opts.max_iter && gap > opts.gap_tol * j_val.abs().max(1.0) {
        it += 1;
        let mut z = &y - (&hy + &phi) * (2.0 / lip);
        project(&mut z);
        let hz = &h * &z;
        let dir = &z - &x;
        let hd = &hz - &hx;
        // Centre the gradient: the simplex projection leaves Σdir at rounding
        // level, which times the mean gradient would swamp the true slope.
        let mut grad = &hx + &phi;
        center(&mut grad);
        let slope = 2.0 * dir.dot(&grad);
        let curv = dir.dot(&hd);
        let alpha = if curv > 0.0 {
            (-slope / (2.0 * curv)).clamp(0.0, 1.0)
        } else if slope < 0.0 {
            1.0
        } else {
            0.0
        };
        // The decrease is exact on the line; comparing energies instead would
        // stall once it drops below the rounding of J.
        let new_j = j_val + (alpha * slope + alpha * alpha * curv).min(0.0);
        if alpha == 0.0 || slope >= 0.0 {
            theta = 1.0;
            y.copy_from(&x);
            hy.copy_from(&hx);
            gap = fw_gap(&x, &hx);
            if dir.amax() < 1e-15 {
                break;
            }
            continue;
        }
        let (x_old, hx_old) = (x.clone(), hx.clone());
        x.axpy(alpha, &dir, 1.0);
        if it % 256 == 0 {
            // clear accumulated drift in the cached products
            hx = &h * &x;
        } else {
            hx.axpy(alpha, &hd, 1.0);
        }
        j_val = if it % 256 == 0 {
            energy(&x, &hx)
        } else {
            new_j
        };
        trace.push(j_val);
        let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_new;
        theta = theta_new;
        y = &x + (&x - &x_old) * beta;
        hy = &hx + (&hx - &hx_old) * beta;
        if it % 8 == 0 {
            gap = fw_gap(&x, &hx);
        }
    }
    hx = &h * &x;
    j_val = energy(&x, &hx);
    gap = fw_gap(&x, &hx);
    if gap > opts.gap_tol * j_val.abs().max(1.0) {
        return Err(Error::EquilibriumNonConvergence {
            iterations: it,
            residual: gap,
        });
    }

    let measures: Vec<DiscretizedMeasure> = (0..d)
        .map(|j| {
            let masses: Vec<f64> = x.as_slice()[off[j]..off[j + 1]].to_vec();
            DiscretizedMeasure {
                grid: cells[j].iter().map(|c| 0.5 * (c[0] + c[1])).collect(),
                cells: cells[j].clone(),
                masses,
            }
        })
        .collect();
    let constants: Vec<f64> = (0..d)
        .map(|j| (off[j]..off[j + 1]).map(|r| x[r] * (hx[r] + phi[r])).sum())
        .collect();

    // Pointwise W_j + φ_j at the midpoints of E_j.
    let point = par::map_range(n, |r| {
        let (j, i) = owner[r];
        let xm = 0.5 * (cells[j][i][0] + cells[j][i][1]);
        let w: f64 = (0..d)
            .map(|k| c.entries[(j, k)] * measures[k].potential_real(xm))
            .sum();
        let f = opts
            .fields
            .get(j)
            .and_then(|f| f.as_ref())
            .map_or(0.0, |f| f(xm));
        w + f
    });
    let residual = (0..n)
        .map(|r| {
            let (j, _) = owner[r];
            let below = (constants[j] - point[r]).max(0.0);
            let above = if x[r] > opts.gap_tol {
                (point[r] - constants[j]).max(0.0)
            } else {
                0.0
            };
            below.max(above)
        })
        .fold(0.0, f64::max);

    Ok(EquilibriumSolution {
        interaction: c.clone(),
        measures,
        constants,
        energy: j_val,
        residual,
        duality_gap: gap,
        iterations: it,
        energy_trace: trace,
    })
}
