use std::f64::consts::PI;

use super::MixedForm;
use crate::error::{Error, Result};
use crate::par;

const GRID: usize = 2048;

/// Sign changes of A_n on a Chebyshev-spaced grid of the open base hull,
/// refined by bisection to 1e-12. Exactly |n_2| simple zeros are expected;
/// anything else is reported as a mismatch. Simplicity is checked through
/// the alternation of sign(A_n') at consecutive zeros.
pub fn zeros_in_hull(form: &MixedForm) -> Result<Vec<f64>> {
    let expected = form.index.total2();
    if expected == 0 {
        return Ok(vec![]);
    }
    let hull = form.mix.base().hull();
    let xs: Vec<f64> = (0..GRID)
        .map(|i| hull.from_unit(-(PI * (i as f64 + 0.5) / GRID as f64).cos()))
        .collect();
    let vals = par::map(&xs, |&x| form.eval_real(x));
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let mut roots = vec![];
    for i in 0..GRID - 1 {
        if vals[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if vals[i].signum() != vals[i + 1].signum() && vals[i + 1] != 0.0 {
            roots.push(bisect(form, xs[i], xs[i + 1], vals[i])?);
        }
    }
    if roots.len() != expected {
        return Err(Error::ZeroCountMismatch {
            found: roots.len(),
            expected,
        });
    }
    let mut prev = 0.0;
    for (i, &x) in roots.iter().enumerate() {
        let d = form.deriv_real(x)?;
        if d == 0.0 || (i > 0 && d.signum() == prev) {
            return Err(Error::ZeroCountMismatch { found: i, expected });
        }
        prev = d.signum();
    }
    Ok(roots)
}

fn bisect(form: &MixedForm, mut a: f64, mut b: f64, fa: f64) -> Result<f64> {
    let sa = fa.signum();
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = form.eval_real(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
