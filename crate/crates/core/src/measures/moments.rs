//! Recurrence coefficients from (modified) moments and formal Laurent inversion.

use super::gauss::golub_welsch;
use super::{Interval, QuadratureRule};
use crate::error::{Error, Result};

/// Modified Chebyshev algorithm in scaled form.
///
/// `m[l]` holds `scale^l · ∫ p_l dμ` where `p_l` are the monic polynomials of
/// the recurrence `p_{l+1} = (t − a_l) p_l − b_l p_{l−1}`. The scaling keeps
/// all intermediate quantities O(1) when `scale` matches the reciprocal of
/// the capacity of the support (2 for Chebyshev polynomials on [−1,1]).
/// Returns the first `n` recurrence coefficients (α_k, β_k) of μ, with
/// β_0 = ∫ dμ.
pub(crate) fn modified_chebyshev(
    m: &[f64],
    a: &[f64],
    b: &[f64],
    scale: f64,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(m.len() >= 2 * n && n >= 1);
    let s2 = scale * scale;
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    if !(m[0] > 0.0) || !m[0].is_finite() {
        return Err(Error::IndefiniteHankel {
            index: 0,
            value: m[0],
        });
    }
    alpha[0] = a[0] + m[1] / (m[0] * scale);
    beta[0] = m[0];
    let len = 2 * n;
    let mut prev2 = vec![0.0; len];
    let mut prev = m[..len].to_vec();
    for k in 1..n {
        let mut cur = vec![0.0; len];
        for l in k..(len - k) {
            let mut v =
                prev[l + 1] - scale * (alpha[k - 1] - a[l]) * prev[l] - s2 * beta[k - 1] * prev2[l];
            if l >= 1 {
                v += s2 * b[l] * prev[l - 1];
            }
            cur[l] = v;
        }
        let bk = cur[k] / (s2 * prev[k - 1]);
        if !(bk > 0.0) || !bk.is_finite() {
            return Err(Error::IndefiniteHankel {
                index: k,
                value: bk,
            });
        }
        beta[k] = bk;
        alpha[k] = a[k] + (cur[k + 1] / cur[k] - prev[k] / prev[k - 1]) / scale;
        prev2 = prev;
        prev = cur;
    }
    Ok((alpha, beta))
}

/// Gauss rule on the unit frame from recurrence coefficients, mapped to `frame`.
pub(crate) fn rule_from_recurrence(
    alpha: &[f64],
    beta: &[f64],
    frame: Interval,
    sign: f64,
) -> Result<QuadratureRule> {
    let (t, z2) = golub_welsch(alpha, beta)?;
    let nodes = t.iter().map(|&t| frame.from_unit(t)).collect();
    let weights = z2.iter().map(|&z| sign * beta[0] * z).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// N-point Gauss rule from raw power moments m_0..m_{2N−1} (Chebyshev
/// algorithm). The sign of m_0 is factored out, so negative measures give
/// negative weights at the same nodes.
pub fn gauss_from_moments(moments: &[f64]) -> Result<QuadratureRule> {
    let unit = Interval { a: -1.0, b: 1.0 };
    gauss_from_moments_in_frame(moments, unit)
}

/// As [`gauss_from_moments`] but the moments are taken with respect to the
/// frame variable t = (x − c)/h.
pub fn gauss_from_moments_in_frame(moments: &[f64], frame: Interval) -> Result<QuadratureRule> {
    if moments.len() < 2 || moments.len() % 2 != 0 {
        return Err(Error::InvalidMeasure(format!(
            "need an even number (≥ 2) of moments, got {}",
            moments.len()
        )));
    }
    let n = moments.len() / 2;
    if moments[0] == 0.0 {
        return Err(Error::IndefiniteHankel {
            index: 0,
            value: 0.0,
        });
    }
    let sign = moments[0].signum();
    let m: Vec<f64> = moments.iter().map(|v| v * sign).collect();
    let zeros = vec![0.0; m.len()];
    let (alpha, beta) = modified_chebyshev(&m, &zeros, &zeros, 1.0, n)?;
    rule_from_recurrence(&alpha, &beta, frame, sign)
}

/// Formal inversion of F(w) = Σ μ_k w^{−k−1}: returns (A, B, ν) with
/// 1/F(w) = A w + B + Σ ν_k w^{−k−1}. Uses `mu.len() − 2` output terms.
pub(crate) fn laurent_inverse(mu: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    if mu.is_empty() || mu[0] == 0.0 {
        return Err(Error::SingularInversion);
    }
    let k = mu.len();
    let r: Vec<f64> = mu.iter().map(|v| v / mu[0]).collect();
    // 1 / (1 + Σ_{i≥1} r_i w^{−i}) = Σ d_i w^{−i}
    let mut d = vec![0.0; k];
    d[0] = 1.0;
    for i in 1..k {
        let mut acc = 0.0;
        for j in 1..=i {
            acc -= r[j] * d[i - j];
        }
        d[i] = acc;
    }
    let a = 1.0 / mu[0];
    let b = d.get(1).copied().unwrap_or(0.0) / mu[0];
    let nu = d.iter().skip(2).map(|v| v / mu[0]).collect();
    Ok((a, b, nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule() {
        let r = gauss_from_moments(&[3.0, 1.5]).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!((r.nodes[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_from_moments() {
        let r = gauss_from_moments(&[2.0, 0.0, 2.0 / 3.0, 0.0]).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-14 && (r.nodes[1] - x).abs() < 1e-14);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_measure_flips_weights_only() {
        let p = gauss_from_moments(&[2.0, 0.0, 2.0 / 3.0, 0.0]).unwrap();
        let n = gauss_from_moments(&[-2.0, 0.0, -2.0 / 3.0, 0.0]).unwrap();
        for i in 0..2 {
            assert_eq!(p.nodes[i], n.nodes[i]);
            assert_eq!(p.weights[i], -n.weights[i]);
        }
    }

    #[test]
    fn indefinite_sequence_rejected() {
        // m_2 < m_1²/m_0 is impossible for a positive measure
        let e = gauss_from_moments(&[1.0, 1.0, 0.5, 0.0]).unwrap_err();
        assert!(matches!(e, Error::IndefiniteHankel { .. }));
    }

    #[test]
    fn scaled_chebyshev_recovers_legendre_recurrence() {
        // Chebyshev moments of Lebesgue on [−1,1]: ∫T_l = 2/(1−l²) for even l.
        let n = 40;
        let mut m = vec![0.0; 2 * n];
        for (l, v) in m.iter_mut().enumerate() {
            let c = if l % 2 == 0 {
                2.0 / (1.0 - (l * l) as f64)
            } else {
                0.0
            };
            *v = if l == 0 { c } else { 2.0 * c };
        }
        let a = vec![0.0; 2 * n];
        let mut b = vec![0.25; 2 * n];
        b[0] = 0.0;
        b[1] = 0.5;
        let (al, be) = modified_chebyshev(&m, &a, &b, 2.0, n).unwrap();
        for k in 1..n {
            let kf = k as f64;
            let exact = kf * kf / (4.0 * kf * kf - 1.0);
            assert!((be[k] - exact).abs() < 1e-12, "k={k}: {} vs {exact}", be[k]);
            assert!(al[k].abs() < 1e-12);
        }
    }

    #[test]
    fn laurent_inverse_of_point_mass() {
        // F(w) = 1/(w − 1) = Σ w^{−k−1}; 1/F = w − 1 exactly.
        let (a, b, nu) = laurent_inverse(&[1.0; 8]).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b + 1.0).abs() < 1e-15);
        assert!(nu.iter().all(|v| v.abs() < 1e-14));
    }
}
