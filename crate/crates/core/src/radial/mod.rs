//! Second-order star calculus for radial functions.
//!
//! A radial function on `R^{2m}` is handled as `F(s)` with `s = r^2`. In that
//! variable the expansions have no `1/r` factors:
//!
//! * `f * g = FG - theta^2 [m F' G' + s (F' G'' + F'' G')]`
//! * `f^{-1} = 1/F + theta^2 [2 s F'^3/F^4 - 2 s F' F''/F^3 - m F'^2/F^3]`
//! * `Lap f = 4 s F'' + 4 m F'`
//!
//! (primes are `d/ds`), so the origin needs no special treatment. Values are
//! Taylor jets in `s`, which carry the derivatives every later operation needs.

pub mod constant_curvature;
pub mod epsilon;
pub mod ode;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;

type JetFn = dyn Fn(f64, usize) -> Result<Jet> + Send + Sync;

/// Radial function `r -> F(r^2)`, evaluated as a jet in `s = r^2`.
#[derive(Clone)]
pub struct RadialFn {
    jet: Arc<JetFn>,
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFn")
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("radius must be real and finite (s = {s})")));
    }
    Ok(())
}

impl RadialFn {
    /// From a closure returning the Taylor jet of `F` about `s` to the given order.
    pub fn from_jet_fn<F>(f: F) -> Self
    where
        F: Fn(f64, usize) -> Result<Jet> + Send + Sync + 'static,
    {
        RadialFn { jet: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_jet_fn(move |_, k| Ok(Jet::constant(c, k)))
    }

    /// Polynomial `sum_j c_j s^j` in `s = r^2`.
    pub fn poly_s(coeffs: Vec<f64>) -> Self {
        Self::from_jet_fn(move |s, k| {
            let x = Jet::variable(s, k);
            let mut acc = Jet::constant(0.0, k);
            for &c in coeffs.iter().rev() {
                acc = (&acc * &x).add_scalar(c);
            }
            Ok(acc)
        })
    }

    /// `h0 = (r^2 + A^2)/(2 A^2)`.
    pub fn sphere_factor(a: f64) -> Self {
        let a2 = a * a;
        Self::poly_s(vec![0.5, 1.0 / (2.0 * a2)])
    }

    /// Jet of `F` in `s` about `r^2`.
    pub fn jet_at(&self, r: f64, order: usize) -> Result<Jet> {
        let s = r * r;
        check_s(s)?;
        (self.jet)(s, order)
    }

    fn jet_s(&self, s: f64, order: usize) -> Result<Jet> {
        (self.jet)(s, order)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.jet_at(r, 0)?.value())
    }

    /// `df/dr = 2 r F'`.
    pub fn d1(&self, r: f64) -> Result<f64> {
        Ok(2.0 * r * self.jet_at(r, 1)?.derivative(1))
    }

    /// `d^2 f/dr^2 = 2 F' + 4 r^2 F''`.
    pub fn d2(&self, r: f64) -> Result<f64> {
        let j = self.jet_at(r, 2)?;
        Ok(2.0 * j.derivative(1) + 4.0 * r * r * j.derivative(2))
    }

    /// `(f, f', f'')` in `r`.
    pub fn eval3(&self, r: f64) -> Result<[f64; 3]> {
        let j = self.jet_at(r, 2)?;
        let (d1, d2) = (j.derivative(1), j.derivative(2));
        Ok([j.value(), 2.0 * r * d1, 2.0 * d1 + 4.0 * r * r * d2])
    }

    pub fn add(&self, other: &RadialFn) -> RadialFn {
        let (f, g) = (self.clone(), other.clone());
        Self::from_jet_fn(move |s, k| Ok(f.jet_s(s, k)? + g.jet_s(s, k)?))
    }

    pub fn sub(&self, other: &RadialFn) -> RadialFn {
        let (f, g) = (self.clone(), other.clone());
        Self::from_jet_fn(move |s, k| Ok(f.jet_s(s, k)? - g.jet_s(s, k)?))
    }

    pub fn scale(&self, c: f64) -> RadialFn {
        let f = self.clone();
        Self::from_jet_fn(move |s, k| Ok(f.jet_s(s, k)?.scale(c)))
    }

    pub fn add_scalar(&self, c: f64) -> RadialFn {
        let f = self.clone();
        Self::from_jet_fn(move |s, k| Ok(f.jet_s(s, k)?.add_scalar(c)))
    }

    /// Ordinary pointwise product.
    pub fn mul(&self, other: &RadialFn) -> RadialFn {
        let (f, g) = (self.clone(), other.clone());
        Self::from_jet_fn(move |s, k| Ok(f.jet_s(s, k)? * g.jet_s(s, k)?))
    }

    /// Laplacian on `R^{2m}`.
    pub fn laplacian(&self, m: u32) -> RadialFn {
        let f = self.clone();
        let mf = f64::from(m);
        Self::from_jet_fn(move |s, k| {
            let j = f.jet_s(s, k + 2)?;
            let d1 = j.deriv();
            let d2 = d1.deriv();
            let x = Jet::variable(s, k);
            Ok((&x * &d2).scale(4.0) + d1.scale(4.0 * mf).truncate(k))
        })
    }
}

/// Star product to second order with `theta^2` replaced by `t2`.
fn star_mul_t2(f: &RadialFn, g: &RadialFn, t2: f64, m: u32) -> RadialFn {
    let (f, g) = (f.clone(), g.clone());
    let mf = f64::from(m);
    RadialFn::from_jet_fn(move |s, k| {
        let fj = f.jet_s(s, k + 2)?;
        let gj = g.jet_s(s, k + 2)?;
        let (f1, g1) = (fj.deriv(), gj.deriv());
        let (f2, g2) = (f1.deriv(), g1.deriv());
        let x = Jet::variable(s, k);
        let corr = (&f1 * &g1).scale(mf) + &x * (&f1 * &g2 + &f2 * &g1);
        Ok((&fj * &gj).truncate(k) - corr.scale(t2))
    })
}

fn star_inv_t2(f: &RadialFn, t2: f64, m: u32) -> RadialFn {
    let f = f.clone();
    let mf = f64::from(m);
    RadialFn::from_jet_fn(move |s, k| {
        let fj = f.jet_s(s, k + 2)?;
        if fj.value() == 0.0 {
            return Err(Error::Pole(format!("star inverse of a function vanishing at r^2 = {s}")));
        }
        let f1 = fj.deriv();
        let f2 = f1.deriv();
        let x = Jet::variable(s, k);
        let inv = fj.truncate(k).recip();
        let inv2 = &inv * &inv;
        let inv3 = &inv2 * &inv;
        let inv4 = &inv2 * &inv2;
        let f1sq = &f1 * &f1;
        let corr = (&x * &(&f1sq * &f1) * &inv4).scale(2.0)
            - (&x * &(&f1 * &f2) * &inv3).scale(2.0)
            - (&f1sq * &inv3).scale(mf);
        Ok(inv + corr.scale(t2))
    })
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("half dimension must be at least 1".into()));
    }
    Ok(())
}

/// `f * g` on `R^{2m}` to order `theta^2`.
pub fn star_mul_radial(f: &RadialFn, g: &RadialFn, theta: f64, m: u32) -> Result<RadialFn> {
    check_m(m)?;
    Ok(star_mul_t2(f, g, theta * theta, m))
}

/// Star inverse on `R^{2m}` to order `theta^2`.
pub fn star_inv_radial(f: &RadialFn, theta: f64, m: u32) -> Result<RadialFn> {
    check_m(m)?;
    Ok(star_inv_t2(f, theta * theta, m))
}

/// Deformed product on `R^{4n}`: `theta^2 -> theta^2 + mu^2`, `m -> 2n`.
pub fn deformed_star_mul_radial(
    f: &RadialFn,
    g: &RadialFn,
    theta: f64,
    mu: f64,
    n: u32,
) -> Result<RadialFn> {
    check_m(n)?;
    Ok(star_mul_t2(f, g, theta * theta + mu * mu, 2 * n))
}

pub fn deformed_star_inv_radial(f: &RadialFn, theta: f64, mu: f64, n: u32) -> Result<RadialFn> {
    check_m(n)?;
    Ok(star_inv_t2(f, theta * theta + mu * mu, 2 * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn accessors_match_finite_differences() {
        let f = RadialFn::from_jet_fn(|s, k| {
            let x = Jet::variable(s, k);
            Ok(x.add_scalar(1.3).ln() * x.add_scalar(0.4).recip())
        });
        let fr = |r: f64| f.value(r).unwrap();
        for r in [0.3, 1.0, 2.2] {
            let h = 1e-4;
            let d1 = (fr(r + h) - fr(r - h)) / (2.0 * h);
            let d2 = (fr(r + h) - 2.0 * fr(r) + fr(r - h)) / (h * h);
            assert!(close(f.d1(r).unwrap(), d1, 1e-7));
            assert!(close(f.d2(r).unwrap(), d2, 1e-5));
        }
    }

    #[test]
    fn unit_is_neutral() {
        let f = RadialFn::sphere_factor(1.3);
        let one = RadialFn::constant(1.0);
        let p = star_mul_radial(&f, &one, 0.2, 2).unwrap();
        for r in [0.0, 0.5, 3.0] {
            assert_eq!(p.value(r).unwrap(), f.value(r).unwrap());
        }
        let c = star_inv_radial(&RadialFn::constant(4.0), 0.3, 1).unwrap();
        assert_eq!(c.value(0.7).unwrap(), 0.25);
    }

    #[test]
    fn r2_squared_in_two_dimensions() {
        // r^2 * r^2 = r^4 - theta^2, which is the levelwise square (theta(2k+1))^2 minus theta^2
        let r2 = RadialFn::poly_s(vec![0.0, 1.0]);
        let t = 0.1;
        let p = star_mul_radial(&r2, &r2, t, 1).unwrap();
        for r in [0.0, 0.5, 1.7] {
            assert!(close(p.value(r).unwrap(), r.powi(4) - t * t, 1e-15));
        }
        for k in 0..6 {
            let level = t * (2 * k + 1) as f64;
            assert!(close(p.value(level.sqrt()).unwrap(), level * level - t * t, 1e-14));
        }
        let classical = star_mul_radial(&r2, &r2, 0.0, 1).unwrap();
        assert_eq!(classical.value(1.5).unwrap(), 1.5f64.powi(4));
    }

    #[test]
    fn sphere_factor_inverse_in_four_dimensions() {
        // h^{-1} - 4 theta^2 A^4/(A^2 + r^2)^4
        let (a, t) = (1.0f64, 0.1);
        let h = RadialFn::sphere_factor(a);
        let inv = star_inv_radial(&h, t, 2).unwrap();
        for r in [0.0, 0.4, 1.0, 3.0] {
            let s = r * r;
            let expect = 2.0 * a * a / (a * a + s) - 4.0 * t * t * a.powi(4) / (a * a + s).powi(4);
            assert!(close(inv.value(r).unwrap(), expect, 1e-15));
        }
    }

    #[test]
    fn deformed_reduces_to_effective_theta() {
        let h = RadialFn::sphere_factor(0.9);
        let g = RadialFn::poly_s(vec![1.0, 0.3, 0.2]);
        let d = deformed_star_mul_radial(&h, &g, 0.03, 0.04, 1).unwrap();
        let e = star_mul_radial(&h, &g, 0.05, 2).unwrap();
        let z = deformed_star_mul_radial(&h, &g, 0.05, 0.0, 1).unwrap();
        for r in [0.0, 0.8, 2.0] {
            assert!(close(d.value(r).unwrap(), e.value(r).unwrap(), 1e-15));
            assert_eq!(z.value(r).unwrap(), e.value(r).unwrap());
        }
        let di = deformed_star_inv_radial(&h, 0.03, 0.04, 1).unwrap();
        let ei = star_inv_radial(&h, 0.05, 2).unwrap();
        assert!(close(di.value(0.5).unwrap(), ei.value(0.5).unwrap(), 1e-15));
    }

    #[test]
    fn laplacian_of_powers() {
        // Lap r^2 = 2n, Lap r^4 = 4(n+2) r^2 on R^n
        let r2 = RadialFn::poly_s(vec![0.0, 1.0]);
        let r4 = RadialFn::poly_s(vec![0.0, 0.0, 1.0]);
        for m in 1..4u32 {
            let n = f64::from(2 * m);
            assert_eq!(r2.laplacian(m).value(0.7).unwrap(), 2.0 * n);
            assert!(close(r4.laplacian(m).value(0.7).unwrap(), 4.0 * (n + 2.0) * 0.49, 1e-15));
        }
    }

    #[test]
    fn inverse_pole_is_reported() {
        let f = RadialFn::poly_s(vec![-1.0, 1.0]);
        let inv = star_inv_radial(&f, 0.1, 1).unwrap();
        assert!(matches!(inv.value(1.0), Err(Error::Pole(_))));
        assert!(star_mul_radial(&f, &f, 0.1, 0).is_err());
    }
}
