//! Truncated Taylor series ("jets") in one variable.
//!
//! A jet of order `K` at `x0` stores `c[k] = f^(k)(x0) / k!` for `k <= K`.
//! Arithmetic on jets composes derivatives exactly (up to rounding), which is
//! how the radial calculus propagates derivatives without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "jet needs at least the value coefficient");
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point; zero beyond the order.
    pub fn derivative(&self, k: usize) -> f64 {
        match self.c.get(k) {
            Some(&ck) => ck * factorial(k),
            None => 0.0,
        }
    }

    /// Jet of the derivative, one order lower.
    pub fn deriv(&self) -> Jet {
        if self.c.len() == 1 {
            return Jet::constant(0.0, 0);
        }
        let c = (1..self.c.len()).map(|k| k as f64 * self.c[k]).collect();
        Jet { c }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = (order + 1).min(self.c.len());
        Jet { c: self.c[..n].to_vec() }
    }

    /// Re-expand about `x0 + h`, keeping the current order.
    pub fn shift(&self, h: f64) -> Jet {
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            // sum_k C(k, j) c_k h^(k-j), Horner in h
            let mut acc = 0.0;
            for k in (j..n).rev() {
                acc = acc * h + binomial(k, j) * self.c[k];
            }
            *o = acc;
        }
        Jet { c: out }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.order()) / self
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut l = vec![0.0; n];
        l[0] = a0.ln();
        // a * l' = a'  =>  k a0 l_k = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}
        for k in 1..n {
            let mut s = k as f64 * self.c[k];
            for j in 1..k {
                s -= j as f64 * l[j] * self.c[k - j];
            }
            l[k] = s / (k as f64 * a0);
        }
        Jet { c: l }
    }

    pub fn powi(&self, e: u32) -> Jet {
        let mut out = Jet::constant(1.0, self.order());
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    fn min_len(a: &Jet, b: &Jet) -> usize {
        a.c.len().min(b.c.len())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = Jet::min_len(self, rhs);
        Jet {
            c: (0..n).map(|k| self.c[k] + rhs.c[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = Jet::min_len(self, rhs);
        Jet {
            c: (0..n).map(|k| self.c[k] - rhs.c[k]).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = Jet::min_len(self, rhs);
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.c[j] * rhs.c[k - j]).sum())
            .collect();
        Jet { c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        let n = Jet::min_len(self, rhs);
        let b0 = rhs.c[0];
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for j in 0..k {
                s -= q[j] * rhs.c[k - j];
            }
            q[k] = s / b0;
        }
        Jet { c: q }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn products_and_quotients_match_calculus() {
        let x = Jet::variable(0.7, 5);
        // f = x^3 / (1 + x^2)
        let f = &x.powi(3) / &(&x * &x).add_scalar(1.0);
        let fd = |x: f64| x.powi(3) / (1.0 + x * x);
        assert!(close(f.value(), fd(0.7), 1e-15));
        // f' = (3x^2 + x^4) / (1 + x^2)^2
        let d1 = (3.0 * 0.49 + 0.7f64.powi(4)) / (1.49f64).powi(2);
        assert!(close(f.derivative(1), d1, 1e-14));
    }

    #[test]
    fn log_derivatives() {
        let x = Jet::variable(2.0, 4);
        let l = x.ln();
        assert!(close(l.derivative(1), 0.5, 1e-15));
        assert!(close(l.derivative(2), -0.25, 1e-15));
        assert!(close(l.derivative(3), 2.0 / 8.0, 1e-15));
        assert!(close(l.derivative(4), -6.0 / 16.0, 1e-15));
    }

    #[test]
    fn shift_reexpands_polynomials_exactly() {
        // p(x) = 1 + 2x + 3x^2 at 0, re-expanded at 1: p(1)=6, p'(1)=8, p''/2 = 3
        let p = Jet::from_coeffs(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.shift(1.0).coeffs(), &[6.0, 8.0, 3.0]);
    }

    #[test]
    fn deriv_lowers_order() {
        let x = Jet::variable(1.5, 3);
        let d = x.powi(3).deriv();
        assert_eq!(d.order(), 2);
        assert!(close(d.value(), 3.0 * 2.25, 1e-15));
    }
}
