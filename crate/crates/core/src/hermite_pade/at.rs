use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Interval, Measure};
use crate::nikishin::NikishinSystem;
use crate::par;
use crate::poly::horner;

const CONTOUR_POINTS: usize = 1024;
const RADII: [f64; 4] = [1.02, 1.03, 1.05, 1.08];

struct Contour {
    z: Vec<C64>,
    vals: Vec<Vec<C64>>,
}

/// Counts zeros in ℂ∖Δ_1 of linear forms p_0 + Σ_k p_k ŝ_{1,k}, with
/// polynomials given by monomial coefficients in z.
///
/// The count is d − W: d is the exact order of the pole at ∞ (read from the
/// moments of s_{1,k}), W the winding number along a thin Bernstein ellipse
/// around Δ_1. Transform values on each ellipse are cached, so many random
/// draws cost only polynomial evaluations.
pub struct AtCounter {
    fns: Vec<Measure>,
    frame: Interval,
    probe: Interval,
    moments: Vec<Vec<f64>>,
    contours: Mutex<HashMap<u64, Arc<Contour>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtReport {
    pub n: Vec<usize>,
    pub trials: usize,
    pub max_zeros: usize,
    pub bound: usize,
    pub violations: usize,
    pub max_real_sign_changes: usize,
}

const DEPTH: usize = 16;

impl AtCounter {
    /// `tail` holds σ_1..σ_m (None for m = 0); `probe` is a real interval
    /// disjoint from Δ_1 scanned for sign changes.
    pub fn new(tail: Option<&NikishinSystem>, probe: Interval) -> Result<Self> {
        let (fns, frame) = match tail {
            Some(t) => (
                (0..=t.m()).map(|k| t.s(0, k)).collect::<Result<Vec<_>>>()?,
                t.hull(0),
            ),
            None => (vec![], probe),
        };
        if !fns.is_empty() && frame.overlaps(&probe) {
            return Err(Error::PreconditionViolated(
                "probe interval must avoid Δ_1".into(),
            ));
        }
        let moments = fns
            .iter()
            .map(|f| f.moments(DEPTH, 1e-15))
            .collect::<Result<_>>()?;
        Ok(AtCounter {
            fns,
            frame,
            probe,
            moments,
            contours: Mutex::new(HashMap::new()),
        })
    }

    pub fn m(&self) -> usize {
        self.fns.len()
    }

    fn contour(&self, r: f64) -> Result<Arc<Contour>> {
        if let Some(c) = self.contours.lock().unwrap().get(&r.to_bits()) {
            return Ok(c.clone());
        }
        let (c, h) = (self.frame.center(), self.frame.half());
        let z: Vec<C64> = (0..CONTOUR_POINTS)
            .map(|q| {
                let u = C64::from_polar(r, 2.0 * PI * q as f64 / CONTOUR_POINTS as f64);
                (u + 1.0 / u) * (0.5 * h) + c
            })
            .collect();
        let vals = par::map(&z, |&zq| {
            self.fns
                .iter()
                .map(|f| f.cauchy_transform(zq))
                .collect::<Result<Vec<_>>>()
        });
        let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
        let ct = Arc::new(Contour { z, vals });
        self.contours
            .lock()
            .unwrap()
            .insert(r.to_bits(), ct.clone());
        Ok(ct)
    }

    /// Value of the form at z.
    pub fn eval(&self, p: &[Vec<f64>], z: C64) -> Result<C64> {
        let mut acc = horner(&p[0], z);
        for (k, f) in self.fns.iter().enumerate() {
            acc += horner(&p[k + 1], z) * f.cauchy_transform(z)?;
        }
        Ok(acc)
    }

    /// Order of the pole at ∞ (negative for a zero there).
    pub fn order_at_infinity(&self, p: &[Vec<f64>]) -> i64 {
        let deg = |v: &Vec<f64>| v.len() as i64 - 1;
        let mut emax = deg(&p[0]);
        for pk in &p[1..] {
            emax = emax.max(deg(pk) - 1);
        }
        let emin = -(DEPTH as i64) + emax.max(0) + 1;
        for e in (emin..=emax).rev() {
            let mut c = 0.0;
            let mut scale = 0.0;
            if e >= 0 {
                if let Some(&v) = p[0].get(e as usize) {
                    c += v;
                    scale += v.abs();
                }
            }
            for (k, pk) in p[1..].iter().enumerate() {
                for (l, &cl) in pk.iter().enumerate() {
                    let i = l as i64 - e - 1;
                    if i >= 0 && (i as usize) < DEPTH {
                        let t = cl * self.moments[k][i as usize];
                        c += t;
                        scale += t.abs();
                    }
                }
            }
            if scale > 0.0 && c.abs() > 1e-11 * scale {
                return e;
            }
        }
        emin
    }

    fn winding(&self, p: &[Vec<f64>]) -> Result<i64> {
        if self.fns.is_empty() {
            return Ok(0);
        }
        'radius: for &r in &RADII {
            let ct = self.contour(r)?;
            let vals: Vec<C64> =
                ct.z.iter()
                    .zip(&ct.vals)
                    .map(|(&z, fv)| {
                        let mut acc = horner(&p[0], z);
                        for (k, v) in fv.iter().enumerate() {
                            acc += horner(&p[k + 1], z) * v;
                        }
                        acc
                    })
                    .collect();
            let vmax = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut total = 0.0;
            for q in 0..vals.len() {
                let a = vals[q];
                let b = vals[(q + 1) % vals.len()];
                if a.norm() < 1e-10 * vmax {
                    continue 'radius;
                }
                let d = (b / a).arg();
                if d.abs() > PI / 2.0 {
                    continue 'radius;
                }
                total += d;
            }
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        Err(Error::ContourThroughZero)
    }

    fn real_sign_changes(&self, p: &[Vec<f64>]) -> Result<usize> {
        let mut prev = 0.0;
        let mut count = 0;
        for i in 0..=512 {
            let x = self.probe.a + self.probe.len() * i as f64 / 512.0;
            let v = self.eval(p, C64::new(x, 0.0))?.re;
            if v != 0.0 {
                if prev != 0.0 && v.signum() != prev {
                    count += 1;
                }
                prev = v.signum();
            }
        }
        Ok(count)
    }

    /// Zeros in ℂ∖Δ_1 (outside the thin ellipse) and real sign changes on the probe.
    pub fn count_zeros(&self, p: &[Vec<f64>]) -> Result<(usize, usize)> {
        let d = self.order_at_infinity(p);
        let w = self.winding(p)?;
        let real = self.real_sign_changes(p)?;
        Ok(((d - w).max(0) as usize, real))
    }

    /// Random draws with coefficients uniform on [−1, 1]; deg p_k ≤ n_k − 1.
    pub fn run(&self, n: &[usize], trials: usize, seed: u64) -> Result<AtReport> {
        if n.len() != self.m() + 1 {
            return Err(Error::InvalidIndex(format!(
                "expected {} components",
                self.m() + 1
            )));
        }
        let total: usize = n.iter().sum();
        let results = par::map_range(trials, |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add(t as u64),
            );
            let p: Vec<Vec<f64>> = n
                .iter()
                .map(|&nk| (0..nk).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            self.count_zeros(&p)
        });
        let mut rep = AtReport {
            n: n.to_vec(),
            trials,
            max_zeros: 0,
            bound: total.saturating_sub(1),
            violations: 0,
            max_real_sign_changes: 0,
        };
        for r in results {
            let (z, real) = r?;
            let observed = z.max(real);
            rep.max_zeros = rep.max_zeros.max(observed);
            rep.max_real_sign_changes = rep.max_real_sign_changes.max(real);
            if observed > rep.bound {
                rep.violations += 1;
            }
        }
        Ok(rep)
    }
}
