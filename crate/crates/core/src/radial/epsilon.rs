//! The `theta^2` correction `h = h0 + theta^2 eps` that makes the curvature
//! constant, and the linear ODEs governing it.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::RadialFn;
use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// The 4D equation for curvature `12/A^2`.
    FourD,
    /// General dimension `2m`.
    General2m(u32),
    /// Deformed space of dimension `4n`.
    Deformed4n(u32),
    /// User supplied coefficients.
    Custom,
}

type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `eps'' + p(r) eps' + q(r) eps + s(r) = 0`.
#[derive(Clone)]
pub struct EpsilonOde {
    pub family: Family,
    pub a: f64,
    /// `lim_{r->0} r p(r)`.
    pub rp0: f64,
    custom: Option<(Coef, Coef, Coef)>,
}

impl fmt::Debug for EpsilonOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EpsilonOde")
            .field("family", &self.family)
            .field("a", &self.a)
            .field("rp0", &self.rp0)
            .finish()
    }
}

/// `(alpha, beta)` with `p = (alpha A^2 - beta r^2)/(r (A^2 + r^2))`.
fn p_shape(family: Family) -> (f64, f64) {
    match family {
        Family::FourD => (3.0, 5.0),
        Family::General2m(m) => {
            let n = f64::from(2 * m);
            (n - 1.0, n + 1.0)
        }
        Family::Deformed4n(n) => {
            let d = f64::from(4 * n);
            (d - 1.0, d + 1.0)
        }
        Family::Custom => (0.0, 0.0),
    }
}

/// ODE coefficients of each family.
pub fn epsilon_ode(family: Family, a: f64) -> Result<EpsilonOde> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {a}")));
    }
    match family {
        Family::General2m(0) | Family::Deformed4n(0) => {
            return Err(Error::InvalidParameter("dimension parameter must be at least 1".into()))
        }
        Family::Custom => {
            return Err(Error::InvalidParameter("use EpsilonOde::custom for custom coefficients".into()))
        }
        _ => {}
    }
    Ok(EpsilonOde {
        family,
        a,
        rp0: p_shape(family).0,
        custom: None,
    })
}

impl EpsilonOde {
    /// Arbitrary coefficients; `rp0` is the finite limit of `r p(r)` at the origin.
    pub fn custom<P, Q, S>(a: f64, rp0: f64, p: P, q: Q, s: S) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        EpsilonOde {
            family: Family::Custom,
            a,
            rp0,
            custom: Some((Arc::new(p), Arc::new(q), Arc::new(s))),
        }
    }

    pub fn p(&self, r: f64) -> f64 {
        if let Some((p, _, _)) = &self.custom {
            return p(r);
        }
        let (alpha, beta) = p_shape(self.family);
        let a2 = self.a * self.a;
        (alpha * a2 - beta * r * r) / (r * (a2 + r * r))
    }

    pub fn q(&self, r: f64) -> f64 {
        if let Some((_, q, _)) = &self.custom {
            return q(r);
        }
        let d = self.a * self.a + r * r;
        match self.family {
            Family::FourD => 8.0 / d,
            Family::General2m(m) => 4.0 * f64::from(m) / d,
            Family::Deformed4n(n) => 8.0 * f64::from(n) / d,
            Family::Custom => unreachable!(),
        }
    }

    pub fn s(&self, r: f64) -> f64 {
        if let Some((_, _, s)) = &self.custom {
            return s(r);
        }
        let a2 = self.a * self.a;
        let d = a2 + r * r;
        let r2 = r * r;
        match self.family {
            Family::FourD => 8.0 / d.powi(3),
            Family::General2m(m) => {
                let m = f64::from(m);
                8.0 * (2.0 * m - 1.0) * (a2 * m + (m - 2.0) * r2) / (a2 * d.powi(3))
            }
            Family::Deformed4n(n) => {
                let n = f64::from(n);
                16.0 * (4.0 * n - 1.0) * (a2 * n + (n - 1.0) * r2) / (a2 * d.powi(3))
            }
            Family::Custom => unreachable!(),
        }
    }

    /// `eps'' + p eps' + q eps + s` for given values at `r`.
    /// At `r = 0` the term `p eps'` is replaced by its limit `rp0 eps''(0)`.
    pub fn defect(&self, r: f64, eps: [f64; 3]) -> f64 {
        let drift = if r == 0.0 { self.rp0 * eps[2] } else { self.p(r) * eps[1] };
        eps[2] + drift + self.q(r) * eps[0] + self.s(r)
    }
}

/// Source of the general-dimension equation when the left side is linearised with
/// the symmetric split of the gradient term:
/// `2m [A^2 m + (m - 2) r^2] / (A^2 (A^2 + r^2)^3)`. At `m = 2` this is the 4D
/// source; the `General2m` source has the same shape but is `4(2m - 1)/m` times larger.
pub fn linearized_source_2m(r: f64, a: f64, m: u32) -> f64 {
    let (a2, m) = (a * a, f64::from(m));
    let d = a2 + r * r;
    2.0 * m * (a2 * m + (m - 2.0) * r * r) / (a2 * d.powi(3))
}

/// Integration constants of the 4D solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonConstants {
    pub c1: f64,
    pub c2: f64,
}

impl EpsilonConstants {
    /// `C2 = 1/(15 A^8)` keeps `eps` bounded at the origin and
    /// `C1 = -(13 + 12 ln A)/(30 A^6)` makes `eps(0) = 0`.
    pub fn defaults(a: f64) -> Self {
        EpsilonConstants {
            c1: -(13.0 + 12.0 * a.ln()) / (30.0 * a.powi(6)),
            c2: 1.0 / (15.0 * a.powi(8)),
        }
    }
}

/// Bounded part of the 4D solution with `C1 = 0` and the default `C2`:
/// `(s^2 - A^2 s - 17 A^4)/(30 A^8) + 1/(30 A^2 (A^2+s)) + (3A^4 - 6A^2 s)/(30 A^6 (A^2+s))
///  + (s - A^2) ln(A^2 + s)/(5 A^6)`.
fn bounded_part(x: &Jet, a: f64) -> Jet {
    let a2 = a * a;
    let (a4, a6, a8) = (a2 * a2, a2 * a2 * a2, a2 * a2 * a2 * a2);
    let d = x.add_scalar(a2);
    let inv_d = d.recip();
    let poly = (x * x - x.scale(a2)).add_scalar(-17.0 * a4).scale(1.0 / (30.0 * a8));
    let frac1 = inv_d.scale(1.0 / (30.0 * a2));
    let frac2 = (x.scale(-6.0 * a2).add_scalar(3.0 * a4) * &inv_d).scale(1.0 / (30.0 * a6));
    let log = (x.add_scalar(-a2) * d.ln()).scale(1.0 / (5.0 * a6));
    poly + frac1 + frac2 + log
}

/// `G = (r^6 - A^2 r^4 - 17 A^4 r^2 + A^6 + 12 (r^2 - A^2) A^2 r^2 ln r)/(2 r^2)`, the
/// solution that is singular at the origin.
fn singular_part(x: &Jet, a: f64) -> Jet {
    let a2 = a * a;
    let (a4, a6) = (a2 * a2, a2 * a2 * a2);
    let x2 = x * x;
    let poly = (&x2 * x) - x2.scale(a2) - x.scale(17.0 * a4);
    let log = (x.add_scalar(-a2) * x * x.ln()).scale(6.0 * a2);
    (poly.add_scalar(a6) + log) * x.recip().scale(0.5)
}

/// The closed-form 4D correction as a radial function.
pub fn epsilon_closed_4d_fn(a: f64, k: EpsilonConstants) -> Result<RadialFn> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {a}")));
    }
    let c2_star = EpsilonConstants::defaults(a).c2;
    let extra = k.c2 - c2_star;
    Ok(RadialFn::from_jet_fn(move |s, order| {
        let x = Jet::variable(s, order);
        let mut e = bounded_part(&x, a) + x.add_scalar(-a * a).scale(k.c1);
        if extra != 0.0 {
            if s == 0.0 {
                return Err(Error::Pole("non-default C2 is singular at r = 0".into()));
            }
            e = e + singular_part(&x, a).scale(extra);
        }
        Ok(e)
    }))
}

/// `eps(r)` of the 4D solution; `r = 0` is allowed only for the default `C2`.
pub fn epsilon_closed_4d(r: f64, a: f64, k: EpsilonConstants) -> Result<f64> {
    epsilon_closed_4d_fn(a, k)?.value(r)
}

/// Literal evaluation of the unsimplified general solution, for `r > 0`.
pub fn epsilon_closed_4d_direct(r: f64, a: f64, k: EpsilonConstants) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("direct form needs r > 0, got {r}")));
    }
    let (r2, a2) = (r * r, a * a);
    let (r4, r6, a4, a6) = (r2 * r2, r2 * r2 * r2, a2 * a2, a2 * a2 * a2);
    let g = (r6 - a2 * r4 - 17.0 * a4 * r2 + a6 + 12.0 * (r2 - a2) * a2 * r2 * r.ln()) / (2.0 * r2);
    let bracket = a6 - 3.0 * a4 * r2 + 6.0 * a2 * r4 + 6.0 * (r4 - a4) * r2 * (r2 / (a2 + r2)).ln();
    Ok(k.c1 * (r2 - a2) + k.c2 * g - bracket / (30.0 * a6 * r2 * (a2 + r2)))
}

/// `(h0(r)/h(r))^2 = h^{-2}/h0^{-2}` with `h = h0 + theta^2 eps` and default constants.
pub fn h_ratio(r: f64, a: f64, theta: f64) -> Result<f64> {
    if !(theta >= 0.0 && theta < a * a / 2.0) {
        return Err(Error::OutOfWindow {
            a,
            theta_eff: theta,
            limit: a * a / 2.0,
        });
    }
    let h0 = (r * r + a * a) / (2.0 * a * a);
    let eps = epsilon_closed_4d(r, a, EpsilonConstants::defaults(a))?;
    let h = h0 + theta * theta * eps;
    if h == 0.0 {
        return Err(Error::Pole(format!("conformal factor vanishes at r = {r}")));
    }
    Ok((h0 / h).powi(2))
}

/// Max of `|eps'' + p eps' + q eps + s|` for the 4D closed form on the given radii.
pub fn closed_form_residual(a: f64, k: EpsilonConstants, radii: &[f64]) -> Result<f64> {
    let ode = epsilon_ode(Family::FourD, a)?;
    let eps = epsilon_closed_4d_fn(a, k)?;
    let mut worst: f64 = 0.0;
    for &r in radii {
        worst = worst.max(ode.defect(r, eps.eval3(r)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_agree_where_they_overlap() {
        let a = 1.3;
        let four = epsilon_ode(Family::FourD, a).unwrap();
        let gen = epsilon_ode(Family::General2m(2), a).unwrap();
        let def = epsilon_ode(Family::Deformed4n(1), a).unwrap();
        for r in [0.1, 0.9, 4.0] {
            assert!((four.p(r) - gen.p(r)).abs() < 1e-14 * four.p(r).abs());
            assert_eq!(four.q(r), gen.q(r));
            assert_eq!(gen.p(r), def.p(r));
            assert_eq!(gen.q(r), def.q(r));
            assert!((gen.s(r) - def.s(r)).abs() < 1e-15 * gen.s(r));
            // the general-family source is 2(2m - 1) = 6 times the 4D one at m = 2
            assert!((gen.s(r) / four.s(r) - 6.0).abs() < 1e-13);
            assert!((linearized_source_2m(r, a, 2) - four.s(r)).abs() < 1e-15 * four.s(r));
        }
        assert_eq!(gen.rp0, 3.0);
        assert!((0.001 * four.p(0.001) - 3.0).abs() < 1e-5);
    }

    #[test]
    fn default_solution_vanishes_at_origin() {
        let k = EpsilonConstants::defaults(1.0);
        assert_eq!(epsilon_closed_4d(0.0, 1.0, k).unwrap(), 0.0);
        assert!(epsilon_closed_4d(1e-6, 1.0, k).unwrap().abs() <= 1e-9);
        let other = EpsilonConstants { c1: k.c1, c2: 2.0 * k.c2 };
        assert!(epsilon_closed_4d(0.0, 1.0, other).is_err());
        assert!(epsilon_closed_4d(0.5, 1.0, other).is_ok());
    }

    #[test]
    fn two_orderings_agree() {
        for a in [0.5, 1.0, 2.0] {
            let k = EpsilonConstants::defaults(a);
            for r in [0.3, 1.0, 2.5, 7.0] {
                let x = epsilon_closed_4d(r, a, k).unwrap();
                let y = epsilon_closed_4d_direct(r, a, k).unwrap();
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "a={a} r={r}: {x} {y}");
            }
            let other = EpsilonConstants { c1: 0.3, c2: 0.2 };
            let x = epsilon_closed_4d(1.7, a, other).unwrap();
            let y = epsilon_closed_4d_direct(1.7, a, other).unwrap();
            assert!((x - y).abs() <= 1e-11 * (1.0 + x.abs()));
        }
        let k = EpsilonConstants::defaults(1.0);
        assert!((epsilon_closed_4d(1.0, 1.0, k).unwrap() + 0.6).abs() < 1e-15);
    }

    #[test]
    fn closed_form_solves_its_equation() {
        for a in [0.5, 1.0, 2.0] {
            let radii: Vec<f64> = (0..=200).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 200.0)).collect();
            let res = closed_form_residual(a, EpsilonConstants::defaults(a), &radii).unwrap();
            assert!(res <= 1e-8, "a={a}: {res}");
            let other = EpsilonConstants { c1: -0.2, c2: 0.7 };
            let res = closed_form_residual(a, other, &radii[100..]).unwrap();
            assert!(res <= 1e-8, "a={a}: {res}");
        }
    }

    #[test]
    fn ratio_limits() {
        assert_eq!(h_ratio(0.7, 1.0, 0.0).unwrap(), 1.0);
        let spread = |a: f64| {
            (0..=50)
                .map(|i| (h_ratio(i as f64 * 0.1 * a, a, 0.1).unwrap() - 1.0).abs())
                .fold(0.0, f64::max)
        };
        assert!(spread(5.0) < spread(2.0));
        assert!(spread(2.0) < spread(1.0));
        assert!(h_ratio(0.5, 1.0, 0.6).is_err());
    }
}
