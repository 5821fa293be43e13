//! Polynomials: Chebyshev series on an affine frame, and plain power series.

use num_complex::Complex64 as C64;

use crate::measures::Interval;

/// p(x) = Σ c_j T_j(t), t = (x − center)/half.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebPoly {
    pub frame: Interval,
    pub coef: Vec<f64>,
}

impl ChebPoly {
    pub fn new(frame: Interval, coef: Vec<f64>) -> Self {
        ChebPoly { frame, coef }
    }

    pub fn zero(frame: Interval) -> Self {
        ChebPoly {
            frame,
            coef: vec![],
        }
    }

    /// Number of coefficients (degree + 1).
    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coef, self.frame.to_unit(x))
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        let t = (z - self.frame.center()) / self.frame.half();
        clenshaw_c(&self.coef, t)
    }

    pub fn scaled(&self, s: f64) -> ChebPoly {
        ChebPoly {
            frame: self.frame,
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// d/dx as a Chebyshev series in the same frame.
    pub fn derivative(&self) -> ChebPoly {
        let n = self.coef.len();
        if n <= 1 {
            return ChebPoly::zero(self.frame);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coef[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let h = self.frame.half();
        ChebPoly {
            frame: self.frame,
            coef: d.iter().map(|v| v / h).collect(),
        }
    }

    /// Divides by (x − y): returns q and r = p(y) with p(x) = (x − y) q(x) + r.
    pub fn divide_linear(&self, y: f64) -> (ChebPoly, f64) {
        let n = self.coef.len();
        if n <= 1 {
            return (
                ChebPoly::zero(self.frame),
                self.coef.first().copied().unwrap_or(0.0),
            );
        }
        let t = self.frame.to_unit(y);
        let deg = n - 1;
        let c = &self.coef;
        let mut d = vec![0.0; deg + 2];
        for k in (2..=deg).rev() {
            d[k - 1] = 2.0 * c[k] - d[k + 1] + 2.0 * t * d[k];
        }
        d[0] = c[1] - 0.5 * d[2] + t * d[1];
        let rem = c[0] - (0.5 * d[1] - t * d[0]);
        d.truncate(deg);
        let h = self.frame.half();
        (
            ChebPoly {
                frame: self.frame,
                coef: d.iter().map(|v| v / h).collect(),
            },
            rem,
        )
    }

    /// Coefficients in powers of the frame variable t.
    pub fn to_unit_monomial(&self) -> Vec<f64> {
        let n = self.coef.len();
        let mut out = vec![0.0; n];
        if n == 0 {
            return out;
        }
        let mut tkm1 = vec![0.0; n];
        let mut tk = vec![0.0; n];
        tkm1[0] = 1.0;
        out[0] += self.coef[0];
        if n > 1 {
            tk[1] = 1.0;
            out[1] += self.coef[1];
        }
        for k in 2..n {
            let mut next = vec![0.0; n];
            for i in 0..n {
                if i >= 1 {
                    next[i] += 2.0 * tk[i - 1];
                }
                next[i] -= tkm1[i];
            }
            for i in 0..n {
                out[i] += self.coef[k] * next[i];
            }
            tkm1 = tk;
            tk = next;
        }
        out
    }

    /// Coefficients in powers of x.
    pub fn to_monomial(&self) -> Vec<f64> {
        let u = self.to_unit_monomial();
        let (c, h) = (self.frame.center(), self.frame.half());
        // t = (x − c)/h; expand Σ u_k t^k by Horner in x.
        let mut out: Vec<f64> = vec![];
        for &uk in u.iter().rev() {
            // out ← out·(x − c)/h + uk
            let mut next = vec![0.0; out.len() + 1];
            for (i, &v) in out.iter().enumerate() {
                next[i + 1] += v / h;
                next[i] -= v * c / h;
            }
            next[0] += uk;
            out = next;
        }
        out
    }

    /// Coefficient of x^{len−1}.
    pub fn leading_x(&self) -> f64 {
        let n = self.coef.len();
        match n {
            0 => 0.0,
            1 => self.coef[0],
            _ => self.coef[n - 1] * 2f64.powi(n as i32 - 2) / self.frame.half().powi(n as i32 - 1),
        }
    }
}

pub fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

pub fn clenshaw_c(c: &[f64], t: C64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = t * b1 * 2.0 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// All T_0..T_{n−1} at t.
pub fn cheb_values(n: usize, t: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if n > 0 {
        v[0] = 1.0;
    }
    if n > 1 {
        v[1] = t;
    }
    for k in 2..n {
        v[k] = 2.0 * t * v[k - 1] - v[k - 2];
    }
    v
}

/// Power-series polynomial Σ c_i z^i.
pub fn horner(c: &[f64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &ci| acc * z + ci)
}

pub fn horner_real(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> Interval {
        Interval::new(1.0, 4.0).unwrap()
    }

    #[test]
    fn division_reproduces_polynomial() {
        let p = ChebPoly::new(frame(), vec![0.3, -1.2, 0.7, 2.0, -0.4]);
        let y = 2.2;
        let (q, r) = p.divide_linear(y);
        assert!((r - p.eval(y)).abs() < 1e-13);
        for &x in &[1.1, 2.9, 3.7, 5.0] {
            let lhs = p.eval(x);
            let rhs = (x - y) * q.eval(x) + r;
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = ChebPoly::new(frame(), vec![0.3, -1.2, 0.7, 2.0, -0.4]);
        let d = p.derivative();
        let x = 2.7;
        let h = 1e-6;
        let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
        assert!((d.eval(x) - fd).abs() < 1e-7);
    }

    #[test]
    fn monomial_conversion_agrees() {
        let p = ChebPoly::new(frame(), vec![0.3, -1.2, 0.7, 2.0, -0.4]);
        let m = p.to_monomial();
        for &x in &[0.0, 1.5, 3.3] {
            assert!((horner_real(&m, x) - p.eval(x)).abs() < 1e-10);
        }
        assert!((m[4] - p.leading_x()).abs() < 1e-12);
    }

    #[test]
    fn complex_evaluation_matches_real_on_axis() {
        let p = ChebPoly::new(frame(), vec![1.0, 2.0, 3.0]);
        let z = C64::new(2.5, 0.0);
        assert!((p.eval_c(z).re - p.eval(2.5)).abs() < 1e-14);
    }
}
