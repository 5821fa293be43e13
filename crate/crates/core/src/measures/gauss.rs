//! Gauss rules from three-term recurrences.
//!
//! The symmetric tridiagonal eigenproblem is solved with implicit QL while
//! tracking only the first row of the eigenvector matrix, which is all the
//! Golub–Welsch weights need. Cost is O(n²), so rules with a few thousand
//! nodes are cheap.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Eigenvalues of the Jacobi matrix with diagonal `alpha` and off-diagonal
/// `sqrt(beta[1..])`, plus the squared first components of the normalized
/// eigenvectors. Output is sorted by eigenvalue.
pub(crate) fn golub_welsch(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = alpha.len();
    assert!(beta.len() >= n);
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        e[i] = beta[i + 1].sqrt();
    }
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    tql_first_row(&mut d, &mut e, &mut z)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let nodes = idx.iter().map(|&i| d[i]).collect();
    let w = idx.iter().map(|&i| z[i] * z[i]).collect();
    Ok((nodes, w))
}

/// Implicit QL with Wilkinson shifts; `e[i]` couples rows i and i+1.
fn tql_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::NonConvergence {
                    nodes: n,
                    change: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m as isize - 1;
            let mut deflated = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                let zf = z[iu + 1];
                z[iu + 1] = s * z[iu] + c * zf;
                z[iu] = c * z[iu] - s * zf;
                i -= 1;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Recurrence coefficients of the Jacobi weight (1−t)^a (1+t)^b on [−1,1];
/// `beta[0]` is the total mass.
pub(crate) fn jacobi_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let ab = a + b;
    alpha[0] = (b - a) / (ab + 2.0);
    beta[0] = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        alpha[k] = if (b * b - a * a).abs() == 0.0 {
            0.0
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        beta[k] = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    (alpha, beta)
}

type JacobiKey = (u64, u64, usize);

static JACOBI_CACHE: LazyLock<Mutex<HashMap<JacobiKey, Arc<(Vec<f64>, Vec<f64>)>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// n-point Gauss–Jacobi rule on [−1,1] for (1−t)^a (1+t)^b, cached.
pub(crate) fn gauss_jacobi_unit(n: usize, a: f64, b: f64) -> Result<Arc<(Vec<f64>, Vec<f64>)>> {
    let key = (a.to_bits(), b.to_bits(), n);
    if let Some(r) = JACOBI_CACHE.lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let (alpha, beta) = jacobi_recurrence(n, a, b);
    let (t, z2) = golub_welsch(&alpha, &beta)?;
    let w = z2.iter().map(|v| v * beta[0]).collect();
    let rule = Arc::new((t, w));
    JACOBI_CACHE.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_legendre() {
        let r = gauss_jacobi_unit(2, 0.0, 0.0).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.0[0] + x).abs() < 1e-15 && (r.0[1] - x).abs() < 1e-15);
        assert!((r.1[0] - 1.0).abs() < 1e-14 && (r.1[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_nodes_closed_form() {
        let n = 37;
        let r = gauss_jacobi_unit(n, -0.5, -0.5).unwrap();
        for (i, (&t, &w)) in r.0.iter().zip(r.1.iter()).enumerate() {
            let exact = -((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            assert!((t - exact).abs() < 1e-13, "{t} vs {exact}");
            assert!((w - std::f64::consts::PI / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn large_legendre_rule_integrates_polynomials() {
        let r = gauss_jacobi_unit(1024, 0.0, 0.0).unwrap();
        let s: f64 =
            r.0.iter()
                .zip(r.1.iter())
                .map(|(t, w)| w * t.powi(10))
                .sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-12);
        let s: f64 = r.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_mass_matches_beta_function() {
        // ∫ (1−t)^{1/2} (1+t)^{−1/2} dt = 2 B(3/2, 1/2) = π
        let r = gauss_jacobi_unit(8, 0.5, -0.5).unwrap();
        let s: f64 = r.1.iter().sum();
        assert!((s - std::f64::consts::PI).abs() < 1e-13);
    }
}
