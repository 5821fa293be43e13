//! Gauss rules for the inverse measure τ (1/ŝ = ℓ + τ̂).
//!
//! The Chebyshev moments ν_l = ∫ T_l(t) dτ are read off a trapezoidal sum
//! of τ̂ = 1/ŝ − ℓ over a Bernstein ellipse around the support. With the
//! Joukowski map ζ = c + h(u + 1/u)/2,
//!
//!   τ̂(ζ) · h (u − 1/u)/2 = ν_0 + 2 Σ_{k≥1} ν_k u^{−k},
//!
//! so averaging against T_l(w) recovers ν_l. The ellipse parameter trades
//! round-off growth (∝ ρ^l) against aliasing (∝ ρ^{−M}); the modified
//! Chebyshev algorithm then produces the recurrence and Golub–Welsch the rule.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::moments::{modified_chebyshev, rule_from_recurrence};
use super::{Affine, Measure, QuadratureRule, Repr, MAX_NODES};
use crate::error::{Error, Result};

pub(crate) fn inverse_rule(parent: &Measure, ell: Affine, n: usize) -> Result<QuadratureRule> {
    let n = match parent.repr() {
        // a discrete parent with K atoms has an inverse with K − 1 atoms
        Repr::Moments { rule, .. } => {
            let k = rule.len();
            if k < 2 {
                return Err(Error::SingularInversion);
            }
            n.min(k - 1)
        }
        _ => n,
    };
    let frame = parent.hull();
    let (c, h) = (frame.center(), frame.half());
    let rho = 10f64.powf(3.0 / (2.0 * n as f64));
    let lr = rho.ln();
    let pnodes = ((18.5 / lr).ceil() as usize + 8).min(MAX_NODES);
    let prule = parent.rule(pnodes)?;
    let m = ((4 * n) as f64).max(40.0 / lr).ceil() as usize;
    let m = m.next_power_of_two();
    let len = 2 * n;

    // conjugate symmetry: g(ū) = conj g(u), so half the points suffice
    let mut nu = vec![0.0; len];
    for j in 0..m / 2 {
        let theta = 2.0 * PI * (j as f64 + 0.5) / m as f64;
        let u = C64::from_polar(rho, theta);
        let w = (u + 1.0 / u) * 0.5;
        let zeta = w * h + c;
        let s_hat = prule.transform(zeta);
        if s_hat.norm() == 0.0 {
            return Err(Error::DerivateConstructionFailed(
                "transform vanished on contour".into(),
            ));
        }
        let g = (1.0 / s_hat - ell.eval(zeta)) * (u - 1.0 / u) * (0.5 * h);
        // T_l(w) by recurrence
        let mut t0 = C64::new(1.0, 0.0);
        let mut t1 = w;
        for (l, v) in nu.iter_mut().enumerate() {
            let tl = if l == 0 {
                t0
            } else if l == 1 {
                t1
            } else {
                let t2 = w * t1 * 2.0 - t0;
                t0 = t1;
                t1 = t2;
                t2
            };
            *v += 2.0 * (tl * g).re;
        }
    }
    for v in nu.iter_mut() {
        *v /= m as f64;
    }
    let sign = nu[0].signum();
    if nu[0] == 0.0 || !nu[0].is_finite() {
        return Err(Error::DerivateConstructionFailed(
            "inverse measure has zero mass".into(),
        ));
    }
    let mut mom = vec![0.0; len];
    mom[0] = sign * nu[0];
    for l in 1..len {
        mom[l] = sign * 2.0 * nu[l];
    }
    let a = vec![0.0; len];
    let mut b = vec![0.25; len];
    b[0] = 0.0;
    if len > 1 {
        b[1] = 0.5;
    }
    let (alpha, beta) = modified_chebyshev(&mom, &a, &b, 2.0, n)
        .map_err(|e| Error::DerivateConstructionFailed(format!("{}: {e}", parent.label())))?;
    rule_from_recurrence(&alpha, &beta, frame, sign)
}
